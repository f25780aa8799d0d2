"""Graph embeddings on curved matrix manifolds.

The package bundles the geometry kernels (small-matrix linear algebra plus
seven Riemannian manifolds), shortest-path graph ingestion, Riemannian
training of node embeddings, reconstruction metrics, discrete curvature
diagnostics, and manifold random-graph sampling behind one CLI.
"""

__version__ = "0.1.0"
