"""anchorcloud: training-free open-world point-cloud classification.

Builds per-category banks of anchor feature prototypes from generated
point clouds and classifies test clouds by nearest-anchor cosine distance,
with a rotation-invariant builtin descriptor, evaluation and ablation
harnesses, and an external-featurizer bridge protocol.
"""

__version__ = "0.1.0"
