"""Gibbs manifolds: exponential families anchored at a reference state.

A point on the manifold of a level G at reference sigma is

    pi(lam) = exp[(ln sigma - <ln sigma>_sigma) - sum_b lam_b B_b] / Z(lam)

with {B_b} the level's orthonormal centered basis.  lam = 0 reproduces
sigma exactly.  ln Z is strictly convex with gradient -g(lam) and Hessian
equal to the canonical-correlation covariance of the basis at pi(lam), so
matching expectation values is an unconstrained convex solve.

The qubit family at the maximally mixed reference has closed forms in
Bloch coordinates; those live at the bottom of this module and double as
an independent check on the generic machinery.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve

from .errors import (
    InfeasibleTargetError,
    ManifoldMismatchError,
    NotConvergedError,
    ValidationError,
)
from .levels import LevelOfDescription, make_level
from .state_space import (
    EIG_FLOOR,
    DensityOperator,
    HermitianOperator,
    _fix_phases,
    expectation,
    kmb_inner,
    pauli_x,
    pauli_y,
    pauli_z,
    uniform_state,
    von_neumann_entropy,
)

logger = logging.getLogger("gibbsfit.gibbs")

# Newton refuses to chase multipliers beyond this: expectation targets on
# the boundary of the achievable set push |lam| to infinity.
LAMBDA_CAP = 1e3

MAX_NEWTON_ITER = 200

# Armijo sufficient-decrease slope and smallest admissible step.
_ARMIJO = 1e-4
_MIN_STEP = 1e-16

__all__ = [
    "GibbsModel",
    "gibbs_state",
    "project",
    "project_state",
    "manifold_relative_entropy",
    "quadratic_form",
    "volume_weight",
    "thermodynamic_entropy",
    "grand_potential",
    "BlochVector",
    "pauli_level",
    "lambdas_from_bloch",
    "bloch_from_lambdas",
    "bloch_to_model",
    "model_to_bloch",
    "bloch_log_norm",
    "bloch_metric",
    "bloch_volume_weight",
    "bloch_relative_entropy",
]


@dataclass(frozen=True, eq=False)
class GibbsModel:
    """One point pi(lam) on a Gibbs manifold, with its local geometry.

    ``g`` holds the basis-coordinate expectations <B_b>, ``corr`` the
    covariance matrix C_bc (symmetric positive definite), which is both
    the Hessian of ln Z and the metric the chi-square forms use.
    """

    sigma: DensityOperator
    level: LevelOfDescription
    lam: np.ndarray
    ln_z: float
    state: DensityOperator
    g: np.ndarray
    corr: np.ndarray

    @property
    def n_params(self) -> int:
        return self.level.n_params

    @property
    def dim(self) -> int:
        """Dimension of the level (identity included)."""
        return self.level.dim

    def generator_expectations(self) -> np.ndarray:
        """Expectations of the retained generators, in input order."""
        lvl = self.level
        return lvl.gen_offsets + lvl.gen_coeffs @ self.g

    def generator_multipliers(self) -> np.ndarray:
        """Multipliers re-expressed against the retained generators.

        Solves T^t mu = lam, so that sum_a mu_a dG_a = sum_b lam_b B_b.
        """
        if self.n_params == 0:
            return np.zeros(0)
        return np.linalg.solve(self.level.gen_coeffs.T, self.lam)

    def same_manifold(self, other: "GibbsModel") -> bool:
        if not self.sigma.same_state(other.sigma):
            return False
        if self.level is other.level:
            return True
        if not self.level.same_context(other.level):
            return False
        if len(self.level.basis) != len(other.level.basis):
            return False
        return all(np.array_equal(a.matrix, b.matrix)
                   for a, b in zip(self.level.basis, other.level.basis))

    def __repr__(self) -> str:
        return (f"GibbsModel(dim={self.dim}, ln_z={self.ln_z:.6g}, "
                f"lam={np.array2string(self.lam, precision=6)})")


def _log_state(sigma: DensityOperator) -> np.ndarray:
    return (sigma.eigenvectors * np.log(sigma.eigenvalues)) @ sigma.eigenvectors.conj().T


def _eval(sigma: DensityOperator, level: LevelOfDescription,
          lam: np.ndarray) -> tuple[DensityOperator, float, np.ndarray, np.ndarray]:
    """Evaluate (state, ln_z, g, corr) at multipliers lam.

    The exponent is computed as ln sigma - lam.B and shifted by its top
    eigenvalue before exponentiation; the centering constant <ln sigma>_sigma
    only moves ln Z and is added back in closed form (it equals minus the
    entropy of sigma).
    """
    k = level.n_params
    ent_sigma = von_neumann_entropy(sigma)
    if sigma.is_classical and level.all_diagonal:
        a = np.log(sigma.probs)
        for lb, op in zip(lam, level.basis):
            a = a - lb * op.diagonal
        m = float(a.max())
        raw = np.exp(a - m)
        total = float(raw.sum())
        p = raw / total
        p = np.maximum(p, EIG_FLOOR)
        p /= p.sum()
        order = np.argsort(p)[::-1]
        vecs = np.eye(p.size, dtype=complex)[:, order]
        state = DensityOperator._from_spectrum(p[order], vecs, probs=p)
        ln_z = m + np.log(total) + ent_sigma
        diags = np.array([op.diagonal for op in level.basis]) if k else np.zeros((0, p.size))
        g = diags @ p
        centered = diags - g[:, None]
        corr = (centered * p) @ centered.T
    else:
        a = _log_state(sigma)
        for lb, op in zip(lam, level.basis):
            a = a - lb * op.matrix
        w, v = np.linalg.eigh(a)
        m = float(w.max())
        raw = np.exp(w - m)
        total = float(raw.sum())
        p = raw / total
        p = np.maximum(p, EIG_FLOOR)
        p /= p.sum()
        v = _fix_phases(v[:, ::-1])
        p = p[::-1].copy()
        state = DensityOperator._from_spectrum(p, v)
        ln_z = m + np.log(total) + ent_sigma
        g = np.array([expectation(state, op) for op in level.basis])
        corr = np.zeros((k, k))
        centered_ops = [
            HermitianOperator.from_matrix(op.matrix - gb * np.eye(op.dim), atol=1e-9)
            for op, gb in zip(level.basis, g)]
        for i in range(k):
            for j in range(i, k):
                corr[i, j] = corr[j, i] = kmb_inner(state, centered_ops[i], centered_ops[j])
    corr = 0.5 * (corr + corr.T)
    return state, ln_z, g, corr


def _check_inputs(sigma: DensityOperator, level: LevelOfDescription) -> None:
    if sigma.dim != level.dim_hilbert:
        raise ValidationError(
            f"reference dimension {sigma.dim} != level dimension {level.dim_hilbert}")
    if level.inner == "kmb" and level.sigma is not None and not level.sigma.same_state(sigma):
        # a level orthonormalized at one state may still be used at another;
        # the span is what matters, so this is deliberate and allowed
        logger.debug("level orthonormalized at a different reference state")


def gibbs_state(sigma: DensityOperator, level: LevelOfDescription, lam) -> GibbsModel:
    """The manifold point at given multipliers (basis coordinates)."""
    lam = np.asarray(lam, dtype=float).reshape(-1)
    _check_inputs(sigma, level)
    if lam.size != level.n_params:
        raise ValidationError(
            f"expected {level.n_params} multipliers, got {lam.size}")
    state, ln_z, g, corr = _eval(sigma, level, lam)
    return GibbsModel(sigma=sigma, level=level, lam=lam.copy(), ln_z=ln_z,
                      state=state, g=g, corr=corr)


def _basis_targets(level: LevelOfDescription, targets: np.ndarray) -> np.ndarray:
    """Convert expectation targets for the retained generators into targets
    for the orthonormal basis: tau_a = c_a + sum_b T_ab t_b."""
    if targets.size != len(level.retained):
        raise ValidationError(
            f"expected {len(level.retained)} generator targets, got {targets.size}")
    if targets.size == 0:
        return np.zeros(0)
    return np.linalg.solve(level.gen_coeffs, targets - level.gen_offsets)


def project(sigma: DensityOperator, level: LevelOfDescription, targets, *,
            coords: str = "generators", max_iter: int = MAX_NEWTON_ITER) -> GibbsModel:
    """Damped-Newton solve for the manifold point matching expectation targets.

    ``targets`` are expectation values of the retained generators (or of the
    orthonormal basis when coords="basis").  This is the projection of any
    state with those expectations onto the manifold: the unique minimizer of
    relative entropy to the reference among states matching the targets.

    Raises InfeasibleTargetError when the iteration caps out or multipliers
    blow past LAMBDA_CAP (targets on or outside the achievable set), and
    NotConvergedError if the line search stagnates without that signature.
    """
    tau = np.asarray(targets, dtype=float).reshape(-1)
    _check_inputs(sigma, level)
    if coords == "generators":
        t = _basis_targets(level, tau)
        back = level.gen_coeffs
    elif coords == "basis":
        if tau.size != level.n_params:
            raise ValidationError(
                f"expected {level.n_params} basis targets, got {tau.size}")
        t = tau
        back = np.eye(level.n_params)
    else:
        raise ValidationError(f"unknown coordinate tag {coords!r}")

    scale = float(np.max(np.abs(tau))) if tau.size else 0.0
    tol = 1e-10 * (1.0 + scale)
    lam = np.zeros(level.n_params)
    state, ln_z, g, corr = _eval(sigma, level, lam)
    if level.n_params == 0:
        return GibbsModel(sigma=sigma, level=level, lam=lam, ln_z=ln_z,
                          state=state, g=g, corr=corr)

    def objective(ln_z_val: float, lam_val: np.ndarray) -> float:
        return ln_z_val + float(lam_val @ t)

    gamma = objective(ln_z, lam)
    for _ in range(max_iter):
        resid = back @ (g - t)
        resid_inf = float(np.max(np.abs(resid)))
        if resid_inf <= tol:
            return GibbsModel(sigma=sigma, level=level, lam=lam, ln_z=ln_z,
                              state=state, g=g, corr=corr)
        grad = t - g
        try:
            step = cho_solve(cho_factor(corr), -grad)
        except np.linalg.LinAlgError as exc:  # pragma: no cover - corr is PD
            raise NotConvergedError(f"covariance factorization failed: {exc}",
                                    last_lambda=lam, residual=resid_inf)
        slope = float(grad @ step)  # = -step.C.step < 0
        s = 1.0
        # near the optimum the true decrease drops below eps*|Gamma|, so a
        # strict sufficient-decrease test rejects full Newton steps and the
        # iteration stalls; allow rounding-level slack
        noise = 1e-14 * (1.0 + abs(gamma))
        while True:
            cand = lam + s * step
            state_c, ln_z_c, g_c, corr_c = _eval(sigma, level, cand)
            if objective(ln_z_c, cand) <= gamma + _ARMIJO * s * slope + noise:
                break
            s *= 0.5
            if s < _MIN_STEP:
                raise NotConvergedError(
                    "line search stagnated before reaching the target tolerance",
                    last_lambda=lam, residual=resid_inf)
        lam, state, ln_z, g, corr = cand, state_c, ln_z_c, g_c, corr_c
        gamma = objective(ln_z, lam)
        if float(np.max(np.abs(lam))) > LAMBDA_CAP:
            raise InfeasibleTargetError(
                "multipliers diverged; targets lie outside the achievable set",
                last_lambda=lam, residual=float(np.max(np.abs(back @ (g - t)))))
    raise InfeasibleTargetError(
        f"no convergence within {max_iter} Newton steps; targets are likely "
        "on the boundary of the achievable set",
        last_lambda=lam, residual=float(np.max(np.abs(back @ (g - t)))))


def project_state(sigma: DensityOperator, level: LevelOfDescription,
                  rho: DensityOperator) -> GibbsModel:
    """Project a state onto the manifold: match all level expectations.

    The result is the generalized Gibbs state of rho at this level and
    reference.  Matching the orthonormal basis is equivalent to matching
    the generators and is better conditioned.
    """
    if rho.dim != level.dim_hilbert:
        raise ValidationError(
            f"state dimension {rho.dim} != level dimension {level.dim_hilbert}")
    t = np.array([expectation(rho, op) for op in level.basis])
    return project(sigma, level, t, coords="basis")


def _require_same_manifold(a: GibbsModel, b: GibbsModel) -> None:
    if not a.same_manifold(b):
        raise ManifoldMismatchError(
            "models live on different manifolds (reference or level differ)")


def manifold_relative_entropy(a: GibbsModel, b: GibbsModel) -> float:
    """S(pi_a || pi_b) for two points of one manifold, in closed form:
    (lam_b - lam_a) . g_a + ln Z_b - ln Z_a."""
    _require_same_manifold(a, b)
    return float((b.lam - a.lam) @ a.g) + b.ln_z - a.ln_z


def quadratic_form(model: GibbsModel, delta) -> float:
    """delta^t C^{-1} delta in the model's local metric (Cholesky solve)."""
    d = np.asarray(delta, dtype=float).reshape(-1)
    if d.size != model.n_params:
        raise ValidationError(
            f"expected a deviation of length {model.n_params}, got {d.size}")
    if d.size == 0:
        return 0.0
    return float(d @ cho_solve(cho_factor(model.corr), d))


def volume_weight(model: GibbsModel) -> float:
    """sqrt(det C): the Riemannian volume density in multiplier coordinates."""
    if model.n_params == 0:
        return 1.0
    sign, logdet = np.linalg.slogdet(model.corr)
    if sign <= 0:  # pragma: no cover - corr is PD by construction
        raise ValidationError("covariance lost positive definiteness")
    return float(np.exp(0.5 * logdet))


def thermodynamic_entropy(model: GibbsModel) -> float:
    """Legendre dual of the log-normalizer: ln Z + lam . g.

    Coincides with the von Neumann entropy of the model state whenever the
    reference is maximally mixed.
    """
    return model.ln_z + float(model.lam @ model.g)


def grand_potential(model: GibbsModel, temperature: float) -> float:
    """Free-energy-like potential -T ln Z at a positive temperature."""
    if temperature <= 0:
        raise ValidationError("temperature must be positive")
    return -temperature * model.ln_z


# -- closed forms for the qubit spin manifold -------------------------
#
# Reference: maximally mixed qubit; level: the three Pauli observables,
# which are already orthonormal in the canonical-correlation product at
# that reference.  Bloch coordinates (r, theta, phi) parametrize the
# expectation values g = r * n with n the unit direction.


@dataclass(frozen=True)
class BlochVector:
    r: float
    theta: float
    phi: float

    @property
    def unit(self) -> np.ndarray:
        st = np.sin(self.theta)
        return np.array([st * np.cos(self.phi),
                         st * np.sin(self.phi),
                         np.cos(self.theta)])

    @property
    def cartesian(self) -> np.ndarray:
        return self.r * self.unit


def pauli_level(sigma: DensityOperator | None = None) -> LevelOfDescription:
    """Spin level of a single qubit: span{1, X, Y, Z}."""
    if sigma is None:
        sigma = uniform_state(2)
    return make_level([pauli_x(), pauli_y(), pauli_z()], "kmb", sigma, label="spin")


def lambdas_from_bloch(b: BlochVector) -> np.ndarray:
    """Multipliers of the spin manifold point with Bloch vector b."""
    return -np.arctanh(b.r) * b.unit


def bloch_from_lambdas(lam) -> BlochVector:
    lam = np.asarray(lam, dtype=float)
    size = float(np.linalg.norm(lam))
    r = float(np.tanh(size))
    if size == 0.0:
        return BlochVector(0.0, 0.0, 0.0)
    n = -lam / size
    theta = float(np.arccos(np.clip(n[2], -1.0, 1.0)))
    phi = float(np.arctan2(n[1], n[0]))
    return BlochVector(r, theta, phi)


def bloch_to_model(b: BlochVector, level: LevelOfDescription | None = None) -> GibbsModel:
    """Evaluate the generic machinery at the closed-form multipliers."""
    if level is None:
        level = pauli_level()
    return gibbs_state(uniform_state(2), level, lambdas_from_bloch(b))


def model_to_bloch(model: GibbsModel) -> BlochVector:
    """Read Bloch coordinates off a spin-manifold point (g = r n)."""
    if model.n_params != 3:
        raise ValidationError("not a spin-level model")
    g = model.g
    r = float(np.linalg.norm(g))
    if r == 0.0:
        return BlochVector(0.0, 0.0, 0.0)
    theta = float(np.arccos(np.clip(g[2] / r, -1.0, 1.0)))
    phi = float(np.arctan2(g[1], g[0]))
    return BlochVector(r, theta, phi)


def bloch_log_norm(b: BlochVector) -> float:
    """ln Z on the spin manifold: ln(2 cosh |lam|) with |lam| = atanh r."""
    return float(np.log(2.0 * np.cosh(np.arctanh(b.r))))


def bloch_metric(b: BlochVector) -> np.ndarray:
    """Canonical-correlation metric in (r, theta, phi) coordinates.

    diag(1/(1-r^2), r atanh r, r atanh r sin^2 theta); the pullback of
    C^{-1} from expectation coordinates through the spherical map.
    """
    r = b.r
    f = r * np.arctanh(r)
    return np.diag([1.0 / (1.0 - r * r), f, f * np.sin(b.theta) ** 2])


def bloch_volume_weight(b: BlochVector) -> float:
    """sqrt(det) of the metric above: r atanh r sin(theta) / sqrt(1 - r^2)."""
    r = b.r
    return float(r * np.arctanh(r) * np.sin(b.theta) / np.sqrt(1.0 - r * r))


def bloch_relative_entropy(a: BlochVector, b: BlochVector) -> float:
    """S(rho_a || rho_b) between qubit states in Bloch form."""
    ra, rb = a.r, b.r
    cross = float(a.unit @ b.unit)
    return (ra * np.arctanh(ra) - ra * np.arctanh(rb) * cross
            + 0.5 * np.log((1.0 - ra * ra) / (1.0 - rb * rb)))
