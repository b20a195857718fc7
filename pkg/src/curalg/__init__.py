"""curalg: symbolic-numeric workbench for trigonometrically deformed
current algebras on simply-laced root systems.

The package verifies, at desk scale, every implementable identity of the
two-parameter current algebra it models: the sh-ratio exchange relations
and cubic relations, the level-1 free-field realization through an exact
contraction calculus, the finite-dimensional spectral module, the
Z-indexed coproduct family with its counit/antipode axioms and level-k
images, and the vertex-operator relation catalog.
"""

__version__ = "0.1.0"
