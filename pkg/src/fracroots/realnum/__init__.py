"""Certified real arithmetic: dyadic balls, exact quadratic fields, certified decisions."""

from .ball import Ball, exp_ball, expm1_ball, log2_ball, log_ball, sqrt_ball
from .quadratic import QuadIrr, exact_ball, floor_exact, quadratic, squarefree_split
from .specs import (
    DEFAULT_POLICY,
    Affine,
    BallFunction,
    Decided,
    ExactInteger,
    FloorDecision,
    LogOfRational,
    Rational,
    RealSpec,
    RecipLogTheta,
    RefinePolicy,
    SqrtRational,
    Undecided,
    as_real,
    ball_compare,
    compare,
    evaluate,
    floor_certified,
    floor_value,
    frac_ball,
    frac_compare,
    is_integer_certified,
)

__all__ = [
    "Affine",
    "Ball",
    "BallFunction",
    "DEFAULT_POLICY",
    "Decided",
    "ExactInteger",
    "FloorDecision",
    "LogOfRational",
    "QuadIrr",
    "Rational",
    "RealSpec",
    "RecipLogTheta",
    "RefinePolicy",
    "SqrtRational",
    "Undecided",
    "as_real",
    "ball_compare",
    "compare",
    "evaluate",
    "exact_ball",
    "exp_ball",
    "expm1_ball",
    "floor_certified",
    "floor_exact",
    "floor_value",
    "frac_ball",
    "frac_compare",
    "is_integer_certified",
    "log2_ball",
    "log_ball",
    "quadratic",
    "sqrt_ball",
    "squarefree_split",
]
