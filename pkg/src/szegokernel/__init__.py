"""Partial Szego kernels and their asymptotics on homogeneous Reinhardt domains.

The package is organized bottom-up:

    expressions   symbolic moduli expressions (parse, differentiate, jets)
    domains       domain definition and first/second complex derivatives
    curvature     induced metric curvature and its determinants
    measure       boundary measure, projective weight, quadrature
    kernels       multi-index norms and partial kernel sums
    asymptotics   closed-form expansion coefficients and sequence fits
    cli           command line front end
"""

from .asymptotics import (
	AsymptoticCoefficients,
	ExpansionFit,
	ExpansionReport,
	a0_closed_form,
	a1_closed_form,
	closed_coefficients,
	fit_expansion,
	kernel_sequence,
	log_a0_extended,
	verify_expansion,
)
from .curvature import (
	curvature_matrix,
	det_curvature_affine,
	det_curvature_x,
	positivity_check,
)
from .domains import (
	ComplexHessian,
	DomainDefinitionError,
	EulerResiduals,
	GeometryError,
	ReinhardtDomain,
	ValidationReport,
	complex_gradient,
	complex_hessian,
	euler_residuals,
	psi_jet,
	validate_domain,
)
from .expressions import (
	EvalDomainError,
	JetValue,
	ParseError,
	check_homogeneity,
	differentiate,
	eval_jet2,
	evaluate,
	parse_expression,
	print_expression,
	substitute,
)
from .kernels import (
	NormEstimate,
	NormTable,
	RescaledPoint,
	bergman_diag,
	build_norm_table,
	enumerate_multi_indices,
	interior_rescale,
	monomial_norm,
	partial_szego,
)
from .measure import (
	IntegralEstimate,
	QuadratureError,
	QuadratureSpec,
	WeightedGrid,
	fs_volume_density,
	hE_weight,
	induced_density,
	integrate_boundary,
	integrate_projective,
	solve_boundary_radius,
	weighted_boundary_grid,
)

__version__ = "0.1.0"
