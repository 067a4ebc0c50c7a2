"""Classical and virtual residues of holomorphic sections.

Three independent routes compute the residue of a weight ``psi`` against a
section ``s``: torus contours, boundary integrals of the Koszul
representative, and the exponential integral of ``psi ⌟ e^S``.  Analytic
oracles and property suites cross-validate them.
"""
__version__ = "0.1.0"

from .algebra import HermitianMetric, TensorForm, contract_weight, dbar, iota_covector, iota_section, wedge
from .cycles import IntegralResult, MCSpec, QuadratureSpec
from .expr import Expr, parse
from .koszul import beta_chain, radius_independence, residue_boundary, residue_contour
from .mq import residue_mq, scaling_check, t_independence
from .oracles import coeff_oracle, newton_critical_points, point_residue_nondegenerate, vafa_sum
from .scene import Scene, affine_scene, lg_scene, monomial_scene, p2_scene

__all__ = [
    "__version__",
    "Expr",
    "parse",
    "TensorForm",
    "HermitianMetric",
    "wedge",
    "dbar",
    "contract_weight",
    "iota_section",
    "iota_covector",
    "Scene",
    "affine_scene",
    "monomial_scene",
    "lg_scene",
    "p2_scene",
    "QuadratureSpec",
    "MCSpec",
    "IntegralResult",
    "beta_chain",
    "residue_contour",
    "residue_boundary",
    "radius_independence",
    "residue_mq",
    "t_independence",
    "scaling_check",
    "coeff_oracle",
    "vafa_sum",
    "newton_critical_points",
    "point_residue_nondegenerate",
]
