"""Subsidy spend, joint (threshold, subsidy) optimization, welfare and regime comparison.

Submodules are imported directly (``strategic_game.subsidy.welfare`` etc.);
``money`` is loaded by the equilibrium package itself.
"""
