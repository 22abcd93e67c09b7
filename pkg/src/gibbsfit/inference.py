"""Statistical layer: significance, evidence weighting, posterior estimates
and model selection across nested levels of description.

Conventions used throughout:

* deviations between states are measured either exactly, as 2 N S(rho||pi),
  or quadratically, as N delta^t C^{-1} delta with the metric evaluated at
  the model state (second argument); the two agree to second order and both
  follow a chi-square law asymptotically,
* the prior over a manifold is entropic, density proportional to
  exp(-alpha S(omega||sigma)), with alpha set by the evidence unless pinned,
* posterior means shrink the data projection toward the reference with
  weight t = alpha / (alpha + N) on the reference.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.special import gammaincc, gammaln

from .errors import EvidenceNotApplicableError, ValidationError
from .gibbs import (
    GibbsModel,
    _basis_targets,
    gibbs_state,
    project,
    project_state,
    quadratic_form,
)
from .levels import (
    LevelOfDescription,
    _embedding,
    complement,
    intersection,
    is_sublevel,
)
from .state_space import (
    DensityOperator,
    HermitianOperator,
    _fix_phases,
    expectation,
    kmb_inner,
    relative_entropy,
)

logger = logging.getLogger("gibbsfit.inference")

# Decision band for the refinement verdict: per-parameter deviation rates
# inside [ln N / BAND_FACTOR, BAND_FACTOR * ln N] are inconclusive; outside,
# the data speak clearly in one direction.
BAND_FACTOR = float(np.sqrt(2.0))

# Below this many fitted directions the evidence estimate still runs but is
# flagged as coarse; the fluctuation argument behind it wants many of them.
DETAIL_MIN_DOF = 10

DEFAULT_SIG_LEVEL = 1e-3

VERDICT_REFINE = "Refine"
VERDICT_KEEP = "KeepCoarse"
VERDICT_INCONCLUSIVE = "Inconclusive"

__all__ = [
    "chi2_logpdf",
    "chi2_pdf",
    "chi2_tail",
    "chi2_log_tail",
    "SignificanceReport",
    "significance",
    "level_significance",
    "ExperimentData",
    "EntropicPrior",
    "entropic_log_density",
    "gaussian_log_norm",
    "AlphaEstimate",
    "estimate_alpha",
    "interpolate_states",
    "log_linear_mix",
    "PosteriorEstimate",
    "posterior_estimate",
    "ComparisonReport",
    "compare_levels",
    "verdict_from_rate",
    "pythagoras_residual",
]


# -- chi-square distribution -------------------------------------------


def chi2_logpdf(x: float, k: int) -> float:
    """Natural log of the chi-square density with k degrees of freedom."""
    if x <= 0 or k <= 0:
        raise ValidationError("chi-square density needs x > 0 and k > 0")
    h = 0.5 * k
    return float((h - 1.0) * np.log(x) - 0.5 * x - h * np.log(2.0) - gammaln(h))


def chi2_pdf(x: float, k: int) -> float:
    return float(np.exp(chi2_logpdf(x, k)))


def chi2_tail(x: float, k: int) -> float:
    """Survival probability P[X >= x] = Q(k/2, x/2)."""
    if k <= 0:
        raise ValidationError("chi-square tail needs k > 0")
    if x <= 0:
        return 1.0
    return float(gammaincc(0.5 * k, 0.5 * x))


def _log_gammaincc_cf(a: float, x: float) -> float:
    """log Q(a, x) for x >> a via the continued fraction
    Gamma(a,x) = e^{-x} x^a / (x+1-a - 1(1-a)/(x+3-a - 2(2-a)/(x+5-a - ...)))
    evaluated with the modified Lentz scheme.  Covers the far tail where the
    regularized function itself underflows."""
    tiny = 1e-300
    b = x + 1.0 - a
    c = 1.0 / tiny
    d = 1.0 / b if b != 0 else 1.0 / tiny
    f = d
    for i in range(1, 400):
        an = -i * (i - a)
        b += 2.0
        d = an * d + b
        if abs(d) < tiny:
            d = tiny
        c = b + an / c
        if abs(c) < tiny:
            c = tiny
        d = 1.0 / d
        delta = d * c
        f *= delta
        if abs(delta - 1.0) < 1e-15:
            break
    return float(-x + a * np.log(x) - gammaln(a) + np.log(f))


def chi2_log_tail(x: float, k: int) -> float:
    """Natural log of the survival probability, stable far into the tail."""
    if k <= 0:
        raise ValidationError("chi-square tail needs k > 0")
    if x <= 0:
        return 0.0
    if k == 2:
        return -0.5 * x  # exact: exponential with mean 2
    a, z = 0.5 * k, 0.5 * x
    q = float(gammaincc(a, z))
    if q > 1e-280:
        return float(np.log(q))
    return _log_gammaincc_cf(a, z)


# -- significance of a deviation ---------------------------------------


@dataclass(frozen=True)
class SignificanceReport:
    """A deviation statistic referred to its asymptotic chi-square law.

    ``entropy_scale`` is the per-sample information the deviation carries,
    statistic / 2N; it concentrates like O(1/N) under the fitted model.
    """

    statistic: float
    dof: int
    n: float
    kind: str
    pdf: float
    log10_pdf: float
    pvalue: float
    log10_pvalue: float
    significant: bool
    sig_level: float
    entropy_scale: float


def significance(chi2: float, k: int, n: float, *,
                 sig_level: float = DEFAULT_SIG_LEVEL,
                 kind: str = "entropy") -> SignificanceReport:
    """Refer a chi-square statistic to its distribution.

    ``significant`` flags tail probabilities below sig_level: deviations
    that sampling noise alone would essentially never produce.
    """
    if n <= 0:
        raise ValidationError("significance needs a positive sample size")
    if not 0.0 < sig_level < 1.0:
        raise ValidationError("significance level must lie in (0, 1)")
    ln10 = np.log(10.0)
    log_tail = chi2_log_tail(chi2, k)
    log_pdf = chi2_logpdf(chi2, k) if chi2 > 0 else -np.inf
    return SignificanceReport(
        statistic=float(chi2), dof=int(k), n=float(n), kind=kind,
        pdf=float(np.exp(log_pdf)), log10_pdf=float(log_pdf / ln10),
        pvalue=float(np.exp(log_tail)), log10_pvalue=float(log_tail / ln10),
        significant=bool(np.exp(log_tail) < sig_level), sig_level=float(sig_level),
        entropy_scale=float(chi2 / (2.0 * n)))


# -- measured data ------------------------------------------------------


def _sublevel_decomposition(data_level: LevelOfDescription,
                            sub: LevelOfDescription) -> tuple[np.ndarray, np.ndarray]:
    """Write each basis element of sub as c_j 1 + sum_b R_jb B_b in the
    data level's frame.  Requires sub to be contained in the data level."""
    embed = _embedding(data_level.inner, data_level.sigma)
    frame = [embed(b) for b in data_level.basis]
    offsets = np.zeros(len(sub.basis))
    coeffs = np.zeros((len(sub.basis), len(frame)))
    for j, op in enumerate(sub.basis):
        if data_level.inner == "kmb":
            c = expectation(data_level.sigma, op)
        else:
            c = float(np.real(np.trace(op.matrix))) / op.dim
        z = embed(HermitianOperator.from_matrix(
            op.matrix - c * np.eye(op.dim), atol=1e-9))
        for b, fz in enumerate(frame):
            coeffs[j, b] = float(np.real(np.vdot(fz, z)))
            z = z - coeffs[j, b] * fz
        if np.sqrt(max(np.real(np.vdot(z, z)), 0.0)) > 1e-8:
            raise ValidationError(
                "level is not contained in the measured level of the data")
        offsets[j] = c
    return offsets, coeffs


@dataclass(frozen=True, eq=False)
class ExperimentData:
    """Sample means of a level's retained generators over n shots.

    ``means`` follow the generator order of ``level``; ``counts`` optionally
    keeps the raw classical histogram behind them (then n must equal its
    total and the means must match it).  n = 0 encodes "no data yet", which
    the posterior maps to the bare prior.
    """

    level: LevelOfDescription
    means: np.ndarray
    n: float
    counts: np.ndarray | None = None

    def __post_init__(self):
        m = np.asarray(self.means, dtype=float).reshape(-1)
        object.__setattr__(self, "means", m)
        if m.size != len(self.level.retained):
            raise ValidationError(
                f"expected {len(self.level.retained)} sample means, got {m.size}")
        if self.n < 0:
            raise ValidationError("sample size must be nonnegative")
        if self.counts is not None:
            c = np.asarray(self.counts, dtype=float)
            if c.ndim != 1 or np.any(c < 0):
                raise ValidationError("counts must be a nonnegative 1-d array")
            if abs(c.sum() - self.n) > 1e-6 * max(1.0, self.n):
                raise ValidationError(f"counts sum to {c.sum()!r} but n = {self.n!r}")
            object.__setattr__(self, "counts", c)
            freq = DensityOperator.classical(c / c.sum())
            gens = [self.level.generators[i] for i in self.level.retained]
            recomputed = np.array([expectation(freq, g) for g in gens])
            if np.max(np.abs(recomputed - m)) > 1e-12 * max(1.0, float(np.max(np.abs(m)))):
                raise ValidationError("stored means do not match the raw counts")

    @classmethod
    def from_counts(cls, counts, level: LevelOfDescription) -> "ExperimentData":
        c = np.asarray(counts, dtype=float)
        n = float(c.sum())
        if n <= 0:
            raise ValidationError("counts must have a positive total")
        freq = DensityOperator.classical(c / n)
        gens = [level.generators[i] for i in level.retained]
        m = np.array([expectation(freq, g) for g in gens])
        return cls(level=level, means=m, n=n, counts=c)

    @property
    def empirical(self) -> DensityOperator | None:
        """The raw frequency distribution, when counts are available."""
        if self.counts is None:
            return None
        return DensityOperator.classical(self.counts / self.counts.sum())

    def basis_means(self) -> np.ndarray:
        """Sample means in the level's orthonormal basis coordinates."""
        return _basis_targets(self.level, self.means)

    def means_for(self, sub: LevelOfDescription) -> np.ndarray:
        """Basis-coordinate sample means for a level inside this one.

        With raw counts available the expectations are taken directly;
        otherwise each sub-basis element is decomposed in the measured
        frame and the stored means are carried through linearly.
        """
        emp = self.empirical
        if emp is not None:
            return np.array([expectation(emp, op) for op in sub.basis])
        offsets, coeffs = _sublevel_decomposition(self.level, sub)
        return offsets + coeffs @ self.basis_means()


# -- entropic prior and evidence weighting --------------------------


@dataclass(frozen=True, eq=False)
class EntropicPrior:
    """Prior over the manifold of ``level`` at ``sigma``: density
    proportional to exp(-alpha S(omega||sigma)).

    ``alpha`` may stay None until the evidence sets it; every consumer that
    needs a number checks first.
    """

    sigma: DensityOperator
    level: LevelOfDescription
    alpha: float | None = None

    def __post_init__(self):
        if self.alpha is not None and self.alpha <= 0:
            raise ValidationError("prior weight alpha must be positive")

    def with_alpha(self, alpha: float) -> "EntropicPrior":
        return EntropicPrior(sigma=self.sigma, level=self.level, alpha=float(alpha))


def gaussian_log_norm(alpha: float, n_params: int) -> float:
    """Log normalization of the entropic density in the Gaussian regime
    around the reference: (k/2) ln(2 pi / alpha).  The local volume factor
    cancels against the covariance of the quadratic entropy expansion."""
    if alpha <= 0:
        raise ValidationError("prior weight alpha must be positive")
    return 0.5 * n_params * float(np.log(2.0 * np.pi / alpha))


def entropic_log_density(omega: GibbsModel, prior: EntropicPrior) -> float:
    """Unnormalized log prior density -alpha S(omega || sigma).

    Points outside the prior's manifold have no support: -inf, with a log
    note.  Pair with gaussian_log_norm for the normalized Gaussian-regime
    density.
    """
    if prior.alpha is None:
        raise EvidenceNotApplicableError(
            "prior weight alpha is unset; run the evidence estimate first")
    if (not omega.sigma.same_state(prior.sigma)
            or not omega.level.same_context(prior.level)
            or len(omega.level.basis) != len(prior.level.basis)
            or not is_sublevel(omega.level, prior.level)):
        logger.info("state lies outside the prior's manifold; density is zero")
        return float("-inf")
    return -prior.alpha * relative_entropy(omega.state, prior.sigma)


@dataclass(frozen=True)
class AlphaEstimate:
    """Evidence-set weight for the entropic prior.

    t is the fraction of the observed squared deviation attributable to
    sampling noise alone; alpha = n t / (1 - t) is the prior weight that
    makes the posterior reproduce that split.  When the deviation does not
    exceed its noise floor (deviation_ok False), alpha is None and the
    caller must supply a weight.  detail_ok flags whether enough directions
    were fitted for the estimate to be sharp.
    """

    alpha: float | None
    t: float
    chi2: float
    dof: int
    n: float
    deviation_ok: bool
    detail_ok: bool


def estimate_alpha(data: ExperimentData, sigma: DensityOperator, *,
                   dim_min: int = DETAIL_MIN_DOF) -> AlphaEstimate:
    """Weight the prior by the data's own deviation off the reference.

    chi2 is the squared distance of the measured expectations from the
    reference point of the data's own level, in the reference metric;
    its pure-noise mean is the number of fitted directions.  The estimate
    depends only on the measured level, not on any model level.
    """
    if data.n <= 0:
        raise EvidenceNotApplicableError("evidence weighting needs data (n > 0)")
    level = data.level
    base = gibbs_state(sigma, level, np.zeros(level.n_params))
    delta = data.basis_means() - base.g
    chi2 = float(data.n) * quadratic_form(base, delta)
    dof = level.n_params
    deviation_ok = chi2 > dof
    detail_ok = dof >= dim_min
    t = dof / chi2 if chi2 > 0 else float("inf")
    if not deviation_ok:
        logger.warning("deviation chi2 = %.4g sits at or below its noise floor "
                       "(dof = %d); evidence weighting is not applicable", chi2, dof)
        return AlphaEstimate(alpha=None, t=t, chi2=chi2, dof=dof, n=float(data.n),
                             deviation_ok=False, detail_ok=detail_ok)
    if not detail_ok:
        logger.warning("evidence weighting with only %d fitted directions; "
                       "the noise-split estimate is coarse below %d", dof, dim_min)
    alpha = float(data.n) * t / (1.0 - t)
    return AlphaEstimate(alpha=alpha, t=t, chi2=chi2, dof=dof, n=float(data.n),
                         deviation_ok=True, detail_ok=detail_ok)


# -- posterior estimate ----------------------------------------------


def interpolate_states(mu_proj: GibbsModel, sigma: DensityOperator,
                       t: float) -> GibbsModel:
    """Slide a manifold point toward its reference: exp[(1-t) ln mu' + t ln sigma]
    renormalized, which on the manifold is exactly multiplier scaling by (1-t).

    t = 0 returns the point itself, t = 1 the reference.
    """
    if not 0.0 <= t <= 1.0:
        raise ValidationError("interpolation weight must lie in [0, 1]")
    if not mu_proj.sigma.same_state(sigma):
        raise ValidationError("interpolation reference differs from the manifold's")
    return gibbs_state(mu_proj.sigma, mu_proj.level, (1.0 - t) * mu_proj.lam)


def log_linear_mix(rho: DensityOperator, sigma: DensityOperator,
                   t: float) -> DensityOperator:
    """Normalized exp[(1-t) ln rho + t ln sigma] for arbitrary states.

    The general form behind interpolate_states; for commuting diagonal
    states it reduces to the renormalized weighted geometric mean.
    """
    if not 0.0 <= t <= 1.0:
        raise ValidationError("interpolation weight must lie in [0, 1]")
    if rho.is_classical and sigma.is_classical:
        a = (1.0 - t) * np.log(rho.probs) + t * np.log(sigma.probs)
        a -= a.max()
        p = np.exp(a)
        return DensityOperator.classical(p / p.sum())
    ln_rho = (rho.eigenvectors * np.log(rho.eigenvalues)) @ rho.eigenvectors.conj().T
    ln_sig = (sigma.eigenvectors * np.log(sigma.eigenvalues)) @ sigma.eigenvectors.conj().T
    a = (1.0 - t) * ln_rho + t * ln_sig
    w, v = np.linalg.eigh(a)
    w = w - w.max()
    p = np.exp(w)
    p /= p.sum()
    return DensityOperator._from_spectrum(p[::-1].copy(), _fix_phases(v[:, ::-1]))


@dataclass(frozen=True, eq=False)
class PosteriorEstimate:
    """Posterior summary after n shots.

    The mean state interpolates between the data projection (onto the part
    of the model level the experiment measures) and the reference, with
    weight t = alpha / (alpha + n) on the reference.  Covariances are
    quoted in expectation coordinates: measured directions tighten as
    C/(alpha + n); model directions the experiment never sees stay at the
    prior width C/alpha.
    """

    rho_hat: GibbsModel
    data_model: GibbsModel
    t: float
    alpha_used: float
    alpha_source: str
    n: float
    measured: LevelOfDescription
    cov_measured: np.ndarray
    unmeasured: LevelOfDescription | None
    cov_unmeasured: np.ndarray | None
    warnings: tuple[str, ...] = field(default=())

    @property
    def state(self) -> DensityOperator:
        return self.rho_hat.state


def _centered_gram(state: DensityOperator, ops) -> np.ndarray:
    k = len(ops)
    gram = np.zeros((k, k))
    centered = [HermitianOperator.from_matrix(
        op.matrix - expectation(state, op) * np.eye(op.dim), atol=1e-9)
        for op in ops]
    for i in range(k):
        for j in range(i, k):
            gram[i, j] = gram[j, i] = kmb_inner(state, centered[i], centered[j])
    return gram


def posterior_estimate(data: ExperimentData, prior: EntropicPrior, *,
                       alpha_policy: str = "evidence",
                       fallback_alpha: float | None = None) -> PosteriorEstimate:
    """Bayes estimate of the state on the prior's level from measured means.

    The experiment's level and the model level need not coincide: the data
    constrain their intersection, and the estimate shrinks that projection
    toward the reference.  alpha_policy "evidence" sets the prior weight
    from the data (estimate_alpha), falling back to prior.alpha or
    fallback_alpha when inapplicable; "fixed" uses prior.alpha as is.
    """
    sigma = prior.sigma
    warnings: list[str] = []

    if alpha_policy == "fixed":
        if prior.alpha is None:
            raise ValidationError("alpha_policy='fixed' needs prior.alpha set")
        alpha, alpha_source = prior.alpha, "user"
    elif alpha_policy == "evidence":
        if data.n == 0:
            est = None
        else:
            est = estimate_alpha(data, sigma)
            if not est.detail_ok:
                warnings.append(
                    f"evidence ran with only {est.dof} fitted directions")
        if est is not None and est.deviation_ok:
            alpha, alpha_source = est.alpha, "evidence"
        else:
            fb = prior.alpha if prior.alpha is not None else fallback_alpha
            if fb is None:
                raise EvidenceNotApplicableError(
                    "evidence weighting inapplicable and no fallback alpha given")
            alpha, alpha_source = float(fb), "fallback"
            warnings.append("evidence weighting inapplicable; fallback alpha used")
    else:
        raise ValidationError(f"unknown alpha policy {alpha_policy!r}")

    inter = intersection(data.level, prior.level)
    if data.n > 0:
        targets = data.means_for(inter)
        data_model = project(sigma, inter, targets, coords="basis")
    else:
        data_model = gibbs_state(sigma, inter, np.zeros(inter.n_params))
    t = alpha / (alpha + data.n)
    rho_hat = interpolate_states(data_model, sigma, t)
    cov_measured = rho_hat.corr / (alpha + data.n)

    unmeasured = None
    cov_unmeasured = None
    comp = complement(inter, prior.level, sigma)
    if not comp.is_trivial:
        unmeasured = comp
        cov_unmeasured = _centered_gram(rho_hat.state, comp.basis) / alpha
    return PosteriorEstimate(
        rho_hat=rho_hat, data_model=data_model, t=t, alpha_used=alpha,
        alpha_source=alpha_source, n=float(data.n), measured=inter,
        cov_measured=cov_measured, unmeasured=unmeasured,
        cov_unmeasured=cov_unmeasured, warnings=tuple(warnings))


# -- significance of a fitted level -----------------------------------


def level_significance(data: ExperimentData, sigma: DensityOperator,
                       level: LevelOfDescription, *, kind: str = "auto",
                       sig_level: float = DEFAULT_SIG_LEVEL) -> SignificanceReport:
    """How surprising is the measured deviation from the best fit at `level`?

    Fits the level to the data, then measures what the fit leaves
    unexplained inside the measured level: exactly, 2 N S(f || fit), when
    raw counts are available (kind="entropy"), else quadratically in the
    measured level's metric at the fit (kind="quadratic").  Degrees of
    freedom: measured minus fitted parameters.
    """
    if data.n <= 0:
        raise ValidationError("significance needs data (n > 0)")
    dof = data.level.n_params - level.n_params
    if dof <= 0:
        raise ValidationError(
            "the measured level must be strictly finer than the fitted one")
    if kind == "auto":
        kind = "entropy" if data.counts is not None else "quadratic"
    targets = data.means_for(level) if not level.is_trivial else np.zeros(0)
    fit = project(sigma, level, targets, coords="basis")
    if kind == "entropy":
        emp = data.empirical
        if emp is None:
            raise ValidationError("entropy statistic needs raw counts")
        stat = 2.0 * data.n * relative_entropy(emp, fit.state)
    elif kind == "quadratic":
        frame_fit = project_state(sigma, data.level, fit.state)
        stat = data.n * quadratic_form(frame_fit, data.basis_means() - frame_fit.g)
    else:
        raise ValidationError(f"unknown statistic kind {kind!r}")
    return significance(stat, dof, data.n, sig_level=sig_level, kind=kind)


# -- model selection across nested levels ------------------------------


def verdict_from_rate(rate: float, n: float,
                      band_factor: float = BAND_FACTOR) -> str:
    """Compare the per-parameter deviation rate against the ln N band."""
    if n <= 1:
        raise ValidationError("verdicts need n > 1")
    ln_n = float(np.log(n))
    if rate > band_factor * ln_n:
        return VERDICT_REFINE
    if rate < ln_n / band_factor:
        return VERDICT_KEEP
    return VERDICT_INCONCLUSIVE


@dataclass(frozen=True, eq=False)
class ComparisonReport:
    """Outcome of weighing a finer level against a coarser one.

    chi2_gain is the quadratic statistic with metric at the coarse fit;
    chi2_exact = 2 N S(fit_fine || fit_coarse) is its exact counterpart.
    log_ratio is the log posterior odds of coarse against fine (positive
    keeps the coarse description); None when no prior weight is available.
    """

    coarse: str
    fine: str
    n: float
    s: int
    rel_entropy: float
    chi2_gain: float
    chi2_exact: float
    per_param: float
    ln_n: float
    band: tuple[float, float]
    verdict: str
    alpha_used: float | None
    log_ratio: float | None
    prior_odds: float
    coarse_model: GibbsModel
    fine_model: GibbsModel


def compare_levels(coarse: LevelOfDescription, fine: LevelOfDescription,
                   data: ExperimentData, sigma: DensityOperator, *,
                   alpha="evidence", prior_odds: float = 1.0,
                   band_factor: float = BAND_FACTOR) -> ComparisonReport:
    """Does the finer level earn its extra parameters on this data?

    Requires coarse within fine within the measured level.  Both levels are
    fitted to the data; the information the refinement captures is scaled
    to a chi-square statistic and referred, per extra parameter, to the
    ln N decision band.

    log posterior odds: (s/2) ln(N/alpha) - (N - alpha) S + ln(prior odds),
    the first term being the parameter-cost penalty the finer model pays.
    alpha="evidence" estimates the weight from the data on its own level,
    a number pins it, None skips the odds (the verdict is alpha-free).
    """
    if data.n <= 1:
        raise ValidationError("model comparison needs n > 1")
    if not is_sublevel(coarse, fine):
        raise ValidationError("coarse level is not contained in the fine level")
    if not is_sublevel(fine, data.level):
        raise ValidationError("fine level is not contained in the measured level")
    s = fine.dim - coarse.dim
    if s <= 0:
        raise ValidationError("fine level adds no parameters over the coarse one")
    if prior_odds <= 0:
        raise ValidationError("prior odds must be positive")

    fine_model = project(sigma, fine, data.means_for(fine), coords="basis")
    coarse_model = project_state(sigma, coarse, fine_model.state)
    s_gain = relative_entropy(fine_model.state, coarse_model.state)
    chi2_exact = 2.0 * data.n * s_gain
    # metric at the coarse fit, deviation measured inside the fine level
    coarse_on_fine = project_state(sigma, fine, coarse_model.state)
    chi2_gain = data.n * quadratic_form(coarse_on_fine,
                                        fine_model.g - coarse_on_fine.g)
    per_param = chi2_gain / s
    ln_n = float(np.log(data.n))
    band = (ln_n / band_factor, band_factor * ln_n)

    alpha_used: float | None
    if alpha == "evidence":
        est = estimate_alpha(data, sigma)
        alpha_used = est.alpha
        if alpha_used is None:
            logger.info("evidence weighting inapplicable; posterior odds omitted")
    elif alpha is None:
        alpha_used = None
    else:
        alpha_used = float(alpha)
        if alpha_used <= 0:
            raise ValidationError("prior weight alpha must be positive")

    log_ratio = None
    if alpha_used is not None:
        log_ratio = float(0.5 * s * np.log(data.n / alpha_used)
                          - (data.n - alpha_used) * s_gain + np.log(prior_odds))
    return ComparisonReport(
        coarse=coarse.label or "coarse", fine=fine.label or "fine",
        n=float(data.n), s=s, rel_entropy=s_gain, chi2_gain=chi2_gain,
        chi2_exact=chi2_exact, per_param=per_param, ln_n=ln_n, band=band,
        verdict=verdict_from_rate(per_param, data.n, band_factor),
        alpha_used=alpha_used, log_ratio=log_ratio, prior_odds=float(prior_odds),
        coarse_model=coarse_model, fine_model=fine_model)


def pythagoras_residual(rho: DensityOperator, sigma: DensityOperator,
                        level: LevelOfDescription) -> float:
    """|S(rho||sigma) - S(rho||pi) - S(pi||sigma)| with pi the projection of
    rho at the level; identically zero in exact arithmetic.  Exposed as a
    cheap end-to-end consistency diagnostic."""
    pi = project_state(sigma, level, rho)
    lhs = relative_entropy(rho, sigma)
    rhs = relative_entropy(rho, pi.state) + relative_entropy(pi.state, sigma)
    return abs(lhs - rhs)
