"""qmaplab: a verification laboratory for one-loop deformed q-map metrics.

From a cubic polynomial model the package constructs the conical special
Kahler domain, the flat-frame hyper-Kahler structure on its cotangent
bundle, the twist to the one-loop deformed quaternionic Kahler metric, and
the affine-Heisenberg symmetry group acting on it -- all evaluated
pointwise with exact second-order forward-mode derivatives so that every
structural identity can be checked at machine precision.
"""

from .errors import (ConsistencyError, DegenerateMetricError, DomainError,
                     FrameMismatchError, GeometryError, InvalidPointError,
                     ModelFormatError)
from .jets import Jet2
from .tensorlab import (CurvatureSample, TensorSample, curvature,
                        derive_scalar, exterior_derivative, lie_derivative,
                        pullback, vector_bracket)
from .special_geometry import (AffineSymmetry, CaskPoint, CaskTensors,
                               CubicModel, affine_coords, affine_generator,
                               builtin_model, cask_tensors,
                               check_cask_automorphism,
                               check_psr_automorphism, embed_affine_symmetry,
                               eval_h, load_model, prepotential, psk_metric,
                               tau_and_validity)
from .cmap import (HKSample, NPoint, RotationData, canonical_lift, hk_sample,
                   I_H, moment_fiber, moment_lift, omega_H, rotation_data,
                   translate_fiber)
from .twistqk import (PPoint, QKMetricSample, QKPoint, elementary_deformation,
                      eta, lift_ZP, lift_hat, project_to_Nbar, qk_metric,
                      qk_metric_field, theta_and_gP)
from .symmetry import (GroupElement, HeisElement, act_Nbar, act_P, compose,
                       effectiveness_check, identity_element,
                       induced_killing_field, inverse, isometry_report,
                       random_group_element, random_qk_point)

__version__ = "0.1.0"
