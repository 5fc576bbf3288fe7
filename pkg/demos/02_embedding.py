# %% [markdown]
# # Attributed network embedding
#
# The solver factorizes the attribute similarity S ~ Q Z^T while pulling
# the embeddings of connected nodes together. Q and Z are updated
# alternately and tied by a scaled dual variable.

# %%
import numpy as np

from aanearch import SolverConfig, build_network, cosine_similarity, embed, project_2d, standardize
from aanearch.embed import edge_penalty
from aanearch.synth import SyntheticSpec, make_synthetic

# %% [markdown]
# A planted-partition week: four blocks of 50 nodes, dense inside blocks,
# sparse between them, with block-shifted attributes.

# %%
data = make_synthetic(SyntheticSpec(timesteps=1, seed=1))
net = build_network(data.edges[0], standardize(data.tables[0]))
print(net.n_nodes, "nodes,", net.n_edges, "edges")

emb, trace = embed(net, SolverConfig(dimension=16))
print("converged:", trace.converged, "after", trace.iterations, "iterations")
for it, obj, res in trace.rows()[:: max(1, trace.iterations // 5)]:
    print(f"  iter {it:3d}  objective {obj:10.3f}  residual {res:.2e}")

# %% [markdown]
# With lambda = 0 the edge term disappears. The result then matches the best
# rank-d approximation of S. S has rank 6 here (six features), so d = 4
# gives a nonzero error to compare.

# %%
s = cosine_similarity(net.attributes)
plain, _ = embed(net, SolverConfig(dimension=4, lam=0.0))
ev = np.sort(np.linalg.eigvalsh(s))[::-1]
print("rank-4 optimum error:", round(float(np.sqrt(np.sum(ev[4:] ** 2))), 4))
print("solver error:        ", round(float(np.linalg.norm(s - plain.values @ plain.values.T)), 4))

# %% [markdown]
# Raising lambda trades attribute fidelity for smoothness over edges.

# %%
for lam in (0.0, 0.05, 0.5):
    e, _ = embed(net, SolverConfig(dimension=16, lam=lam))
    print(f"lambda={lam:<5} edge penalty {edge_penalty(e, net):12.1f}")

# %% [markdown]
# A 2-D view on the top principal axes. The four blocks separate.

# %%
xy = project_2d(emb)
for b in range(4):
    print("block", b, "centroid", np.round(xy[data.truth[0] == b].mean(axis=0), 2))
