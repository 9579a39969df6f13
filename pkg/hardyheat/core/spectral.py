"""
Ground state (λ₁, φ₁), ajuste de expoentes, identidade da transformação de ground state
e o problema de camada de fronteira μ₁(Ω_δ)
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np
import structlog
from scipy import linalg, optimize, special
from scipy.interpolate import RegularGridInterpolator
from scipy.sparse import diags
from scipy.sparse.linalg import LinearOperator, eigsh, splu

from hardyheat.core.discretize import (
    DiscreteForm,
    assemble,
    axis_rule,
    coarsen,
    eta_eval,
    eta_factors,
    graded_axis,
)
from hardyheat.core.errors import (
    DivisionUnderflow,
    FactorizationFailed,
    NotBoundedBelow,
    ParameterOutOfRange,
    WindowTooNarrow,
)
from hardyheat.core.geometry import (
    ShapeKind,
    StratifiedDomain,
    StratumGeometry,
    sphere_area,
    stratum_distance,
    stratum_separation,
)

logger = structlog.get_logger(__name__)

DEFAULT_DENSE_LIMIT = 600
SAMPLES_PER_OCTAVE = 4
MIN_FIT_SAMPLES = 8


def x_weight(t):
    """X(t) = 1/(1 − ln t), com X(1) = 1 e X(e^{−1}) = 1/2"""
    return 1.0 / (1.0 - np.log(t))


@dataclass
class FittedExponent:
    label: str
    codim: int
    alpha_hat: float
    predicted: float
    window: tuple[float, float]
    r2: float
    spread: float
    samples: int

    def to_dict(self) -> dict[str, Any]:
        return {
            "label": self.label,
            "codim": self.codim,
            "alpha_hat": self.alpha_hat,
            "predicted": self.predicted,
            "window": list(self.window),
            "r2": self.r2,
            "spread": self.spread,
            "samples": self.samples,
        }


@dataclass
class GroundState:
    """
    Par (λ₁, φ₁) discreto

    `coef` são os coeficientes livres na base da forma; `phi1` são os valores nodais de u,
    positivos nos nós interiores e normalizados com máximo 1.
    """

    lambda1: float
    coef: np.ndarray
    phi1: np.ndarray
    residual: float
    form: DiscreteForm = field(repr=False)
    fitted_exponents: dict[str, FittedExponent] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "lambda1": self.lambda1,
            "residual": self.residual,
            "dofs": self.form.dofs,
            "basis": self.form.basis,
            "mesh": self.form.mesh.describe(),
            "fitted_exponents": {k: v.to_dict() for k, v in self.fitted_exponents.items()},
        }


# ---------------------------------------------------------------------------
# Autovalor
# ---------------------------------------------------------------------------

def _signless(c: np.ndarray) -> bool:
    scale = np.max(np.abs(c))
    return bool(np.all(c >= -1e-8 * scale) or np.all(c <= 1e-8 * scale))


def _interior_nodes(form: DiscreteForm) -> np.ndarray:
    mesh = form.mesh
    nodes = mesh.nodes
    ok = np.ones(len(nodes), dtype=bool)
    for s in mesh.dom.strata:
        ok &= np.abs(stratum_distance(mesh.dom, s, nodes, mesh.radial)) > 1e-14
    return ok


def smallest_eigenpair(K, M, dense_limit: int = DEFAULT_DENSE_LIMIT, sigma: float | None = None,
                       tol: float = 1e-10) -> tuple[float, np.ndarray]:
    """Menor par generalizado de (K, M): denso até `dense_limit` dofs, senão shift-invert"""
    n = K.shape[0]
    if n <= dense_limit or sigma is None:
        w, V = linalg.eigh(K.toarray(), M.toarray(), subset_by_index=[0, 0])
        return float(w[0]), V[:, 0]
    shift = sigma
    best = None
    for attempt in range(4):
        try:
            lu = splu((K - shift * M).tocsc())
        except RuntimeError as e:
            raise FactorizationFailed("fatoração singular no shift-invert", sigma=shift, error=str(e))
        op = LinearOperator((n, n), matvec=lu.solve, dtype=float)
        w, V = eigsh(K, k=min(3, n - 1), M=M, sigma=shift, OPinv=op, which="LM", tol=tol)
        i = int(np.argmin(w))
        best = (float(w[i]), V[:, i])
        if _signless(V[:, i]):
            break
        logger.warning("Autovetor com troca de sinal; reduzindo o shift", tentativa=attempt, sigma=shift)
        shift -= max(1.0, abs(shift))
    return best


def solve_ground_state(form: DiscreteForm, tol: float = 1e-10,
                       dense_limit: int = DEFAULT_DENSE_LIMIT) -> GroundState:
    """
    Menor autopar generalizado de (A − P, M)

    Acima de `dense_limit` dofs usa shift-invert com shift λ₁(grossa) − max(1, 0.1|λ₁(grossa)|)
    vindo de uma pré-solução na malha aninhada mais grossa.
    """
    K, M = form.K, form.Mf
    sigma = None
    if form.dofs > dense_limit:
        coarse = assemble(coarsen(form.mesh), form.spec, basis=form.basis)
        lam_c = solve_ground_state(coarse, tol, dense_limit).lambda1
        sigma = lam_c - max(1.0, 0.1 * abs(lam_c))
    lam, c = smallest_eigenpair(K, M, dense_limit, sigma, tol)
    if np.sum(c) < 0:
        c = -c
    residual = float(np.linalg.norm(K @ c - lam * (M @ c)) / np.linalg.norm(c))
    phi = form.nodal_u(c)
    interior = _interior_nodes(form)
    scale = float(np.max(phi[interior]))
    c = c / scale
    phi = phi / scale
    logger.info("Ground state calculado", lambda1=lam, dofs=form.dofs, residual=residual)
    return GroundState(lambda1=lam, coef=c, phi1=phi, residual=residual, form=form)


def richardson(fine: float, coarse: float, order: int = 2) -> float:
    """Extrapolação de Richardson para malhas de passo h e 2h"""
    f = 2.0 ** order
    return (f * fine - coarse) / (f - 1.0)


def check_bounded_below(sequence: Sequence[float]) -> None:
    """NotBoundedBelow se λ₁(h) decresce sem estabilizar em três refinamentos"""
    seq = list(sequence)
    if len(seq) < 3:
        return
    d = np.diff(seq)
    if np.all(d < 0) and abs(d[-1]) >= abs(d[-2]):
        raise NotBoundedBelow("λ₁ decresce sem estabilizar sob refinamento", sequence=seq)


# ---------------------------------------------------------------------------
# Ajuste de expoentes
# ---------------------------------------------------------------------------

def _ray(dom: StratifiedDomain, label: str, t: np.ndarray) -> np.ndarray:
    """Pontos a distância t do estrato ao longo de uma transversal"""
    s = dom.stratum(label)
    shape = dom.shape
    if shape.kind == ShapeKind.INTERVAL:
        if s.geometry == StratumGeometry.FLAT_PIECE and abs(s.value - shape.b) < 1e-14:
            return (shape.b - t)[:, None]
        return (shape.a + t)[:, None]
    if shape.kind == ShapeKind.RECTANGLE:
        return np.column_stack([t, np.full_like(t, 0.5 * shape.widths[1])])
    if s.geometry == StratumGeometry.POINT:
        return t[:, None]
    return (shape.radius - t)[:, None]


def evaluate_phi(gs: GroundState, pts: np.ndarray) -> np.ndarray:
    """φ₁ = η·v com v interpolado linearmente na malha"""
    form = gs.form
    mesh = form.mesh
    v = form.embed(gs.coef)
    if mesh.dim == 1:
        vals = np.interp(pts[:, 0], mesh.axes[0], v)
    else:
        interp = RegularGridInterpolator(mesh.axes, v.reshape(mesh.shape))
        vals = interp(pts)
    if form.basis == "ground_state":
        eta, _, _ = eta_eval(eta_factors(mesh.dom, form.entries), pts, mesh.radial, mesh.dom.dimension)
        vals = eta * vals
    return vals


def default_window(gs: GroundState) -> tuple[float, float]:
    mesh = gs.form.mesh
    return max(10.0 * mesh.h_min, 1e-4), mesh.dom.localization_beta / 4.0


def fit_exponents(gs: GroundState, dom: StratifiedDomain, window: tuple[float, float] | None = None,
                  iterations: int = 2) -> dict[str, FittedExponent]:
    """
    α̂_k por mínimos quadrados de log φ₁ contra log d_k ao longo de uma transversal

    Fatores dos outros estratos singulares são divididos com seus expoentes correntes
    (previstos na primeira passada), um estrato por vez.
    """
    lo, hi = window or default_window(gs)
    if not hi > lo:
        raise WindowTooNarrow("janela de ajuste vazia", window=[lo, hi])
    count = int(math.floor(SAMPLES_PER_OCTAVE * math.log2(hi / lo))) + 1
    if count < MIN_FIT_SAMPLES:
        raise WindowTooNarrow("menos de 8 raios na janela de ajuste", window=[lo, hi], samples=count)
    strata = list(dom.strata)
    for i, s in enumerate(strata):
        for t in strata[i + 1:]:
            if stratum_separation(dom, s, t) < 2.0 * hi:
                raise WindowTooNarrow("janelas de estratos distintos se sobrepõem", estratos=[s.label, t.label])

    entries = gs.form.entries
    t = np.geomspace(lo, hi, count)
    current = {s.label: entries[s.label].alpha for s in strata}
    data = {}
    for s in strata:
        pts = _ray(dom, s.label, t)
        phi = evaluate_phi(gs, pts)
        if np.any(phi <= 0) or not np.all(np.isfinite(phi)):
            raise WindowTooNarrow("φ₁ não positivo na janela", estrato=s.label)
        dists = {o.label: stratum_distance(dom, o, pts, dom.shape.is_radial) for o in strata}
        data[s.label] = (phi, dists)

    results: dict[str, FittedExponent] = {}
    for _ in range(iterations):
        for s in strata:
            phi, dists = data[s.label]
            y = np.log(phi)
            for o in strata:
                if o.label != s.label and entries[o.label].singular:
                    y = y - current[o.label] * np.log(dists[o.label])
            x = np.log(dists[s.label])
            slope, intercept = np.polyfit(x, y, 1)
            fit = slope * x + intercept
            ss_res = float(np.sum((y - fit) ** 2))
            ss_tot = float(np.sum((y - y.mean()) ** 2))
            r2 = 1.0 - ss_res / ss_tot if ss_tot > 0 else 1.0
            current[s.label] = float(slope)
            ratio = y - slope * x
            results[s.label] = FittedExponent(
                label=s.label,
                codim=s.codim,
                alpha_hat=float(slope),
                predicted=entries[s.label].alpha,
                window=(lo, hi),
                r2=r2,
                spread=float(np.exp(ratio.max() - ratio.min())),
                samples=count,
            )
    gs.fitted_exponents = results
    logger.info("Expoentes ajustados", **{k: v.alpha_hat for k, v in results.items()})
    return results


def cross_check_exponents(gs: GroundState, plain: GroundState, dom: StratifiedDomain,
                          window: tuple[float, float] | None = None) -> dict[str, dict[str, Any]]:
    """
    Refaz o ajuste com φ₁ da base plana, que não carrega o expoente previsto

    Em estratos críticos (c = (k−2)²/4) a solução plana só se aproxima de d^α a taxa
    logarítmica em h; o valor é reportado sem entrar na comparação.
    """
    if plain.form.basis != "plain":
        raise ParameterOutOfRange("verificação cruzada exige ground state na base plana", base=plain.form.basis)
    window = window or default_window(gs)
    eta_fit = gs.fitted_exponents or fit_exponents(gs, dom, window)
    plain_fit = fit_exponents(plain, dom, window)
    out = {}
    for label, fit in plain_fit.items():
        critical = plain.form.entries[label].critical
        out[label] = {
            "alpha_plain": fit.alpha_hat,
            "alpha_eta": eta_fit[label].alpha_hat,
            "predicted": fit.predicted,
            "critical": critical,
            "checked": not critical,
            "plain_h_min": plain.form.mesh.h_min,
        }
    logger.info("Expoentes na base plana", **{k: v["alpha_plain"] for k, v in out.items()})
    return out


# ---------------------------------------------------------------------------
# Identidade da transformação de ground state
# ---------------------------------------------------------------------------

def ground_state_identity(form: DiscreteForm, gs: GroundState, u_samples: Sequence[np.ndarray]) -> float:
    """
    max |Q[u] − λ₁‖u‖² − ∫φ₁²|∇(u/φ₁)|²_a| / (|Q[u]| + ‖u‖²) sobre as amostras

    Amostras são vetores de coeficientes livres na base da forma.
    """
    kappa = form.kappa
    if kappa is None:
        raise ParameterOutOfRange("identidade exige coeficiente escalar constante", potencial=form.spec.name)
    cphi = gs.coef
    vphi = form.v_qp(cphi)
    S = form.restrict(form.stiffness_matrix(kappa * vphi ** 2))
    worst = 0.0
    for c_u in u_samples:
        c_u = np.asarray(c_u, dtype=float)
        bad = (np.abs(cphi) < 1e-300) & (c_u != 0.0)
        if np.any(bad):
            raise DivisionUnderflow("φ₁ abaixo de 1e−300 onde u ≠ 0", nos=int(bad.sum()))
        with np.errstate(divide="ignore", invalid="ignore"):
            vhat = np.where(c_u != 0.0, c_u / cphi, 0.0)
        q = form.Q(c_u)
        nrm = form.norm2(c_u)
        grad = float(vhat @ (S @ vhat))
        defect = abs(q - gs.lambda1 * nrm - grad) / (abs(q) + nrm)
        worst = max(worst, defect)
    logger.debug("Defeito da identidade de ground state", defeito=worst, amostras=len(u_samples))
    return worst


def bump_samples(form: DiscreteForm, gs: GroundState, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    """u = φ₁·(bump suave) com centros e larguras sorteados"""
    nodes = form.mesh.nodes[form.free]
    lo = nodes.min(axis=0)
    hi = nodes.max(axis=0)
    out = []
    for _ in range(count):
        center = lo + (hi - lo) * rng.uniform(0.25, 0.75, size=lo.shape)
        width = (hi - lo) * rng.uniform(0.15, 0.3, size=lo.shape)
        z = np.sum(((nodes - center) / width) ** 2, axis=1)
        bump = np.where(z < 1.0, np.exp(-1.0 / np.maximum(1.0 - z, 1e-300)), 0.0)
        out.append(gs.coef * bump)
    return out


# ---------------------------------------------------------------------------
# Camada de fronteira
# ---------------------------------------------------------------------------

@dataclass
class LayerResult:
    delta: float
    mu1: float
    lower_bound: float
    refined_quotient: float

    def to_dict(self) -> dict[str, float]:
        return {
            "delta": self.delta,
            "mu1": self.mu1,
            "lower_bound": self.lower_bound,
            "refined_quotient": self.refined_quotient,
        }


def _line_matrices(nodes: np.ndarray, targets: Sequence[float], jac, pot, weights: Sequence):
    x, w, _, B, D = axis_rule(nodes, targets, 4)
    wj = w * jac(x)
    K = D.T @ diags(wj * weights[0](x)) @ D + B.T @ diags(wj * pot(x)) @ B
    masses = [B.T @ diags(wj * f(x)) @ B for f in weights[1:]]
    return K.tocsr(), [m.tocsr() for m in masses]


def _layer_setup(dom: StratifiedDomain, delta: float, h_min: float):
    shape = dom.shape
    if shape.kind == ShapeKind.INTERVAL or shape.kind == ShapeKind.RECTANGLE:
        # faces planas: Δd = 0; retângulo reduzido à direção normal de uma face
        edge = 0.0 if shape.kind == ShapeKind.RECTANGLE else shape.a
        nodes, _ = graded_axis(edge, edge + delta, [edge], h_min, 0.5, None, delta / 32.0)
        d = lambda x: x - edge  # noqa: E731
        return nodes, [edge], d, (lambda x: np.ones_like(x)), (lambda x: np.zeros_like(x)), -1
    R = shape.radius
    n = shape.dimension
    nodes, _ = graded_axis(R - delta, R, [R], h_min, 0.5, None, delta / 32.0)
    d = lambda x: R - x  # noqa: E731
    return nodes, [R], d, (lambda x: sphere_area(n) * x ** (n - 1)), (lambda x: 0.5 * (n - 1) / x), 0


def boundary_layer_mu1(dom: StratifiedDomain, deltas: Sequence[float], h_min: float = 2.0 ** -20) -> list[LayerResult]:
    """
    μ₁(Ω_δ) = inf ∫(d|∇v|² − Δd v²/2) / ∫d v² na camada Ω_δ

    Natural no estrato (onde o peso d se anula), Dirichlet na face interna da camada.
    Reporta também a cota (1/8)X²(δ)/δ² e o quociente refinado com peso X²(d)/d.
    """
    if any(s.codim != 1 for s in dom.strata):
        raise ParameterOutOfRange("camada de fronteira exige apenas estratos de codim 1")
    out = []
    for delta in deltas:
        if not 0.0 < delta < dom.localization_beta:
            raise ParameterOutOfRange("δ deve estar em (0, β)", delta=delta, beta=dom.localization_beta)
        nodes, targets, d, jac, pot, inner = _layer_setup(dom, delta, h_min)
        K, (Md, Mx) = _line_matrices(nodes, targets, jac, pot,
                                     [d, d, lambda x: x_weight(d(x)) ** 2 / d(x)])
        keep = np.ones(len(nodes), dtype=bool)
        keep[inner] = False
        idx = np.flatnonzero(keep)
        Kf, Mf, Xf = (m[idx][:, idx] for m in (K, Md, Mx))
        mu, v = smallest_eigenpair(Kf, Mf, dense_limit=10 ** 6)
        refined = float(v @ (Kf @ v)) / float(v @ (Xf @ v))
        bound = 0.125 * x_weight(delta) ** 2 / delta ** 2
        out.append(LayerResult(float(delta), mu, bound, refined))
        logger.info("μ₁ da camada calculado", delta=delta, mu1=mu, cota=bound)
    return out


def refined_hardy_quotient(delta: float, h_min: float = 2.0 ** -30) -> float:
    """
    inf ∫(u'² − u²/(4x²)) / ∫X²(x)u²/x² sobre u com suporte em (0, δ)

    A desigualdade de Hardy refinada garante valor ≥ 1/8.
    """
    if not 0.0 < delta < 1.0:
        raise ParameterOutOfRange("δ deve estar em (0,1)", delta=delta)
    nodes, _ = graded_axis(0.0, delta, [0.0, delta], h_min, 0.5, None, delta / 64.0)
    K, (Mx,) = _line_matrices(
        nodes, [0.0, delta], lambda x: np.ones_like(x), lambda x: -0.25 / x ** 2,
        [lambda x: np.ones_like(x), lambda x: x_weight(x) ** 2 / x ** 2],
    )
    idx = np.arange(1, len(nodes) - 1)
    val, _ = smallest_eigenpair(K[idx][:, idx], Mx[idx][:, idx], dense_limit=10 ** 6)
    logger.info("Quociente de Hardy refinado", delta=delta, valor=val)
    return val


# ---------------------------------------------------------------------------
# Oráculos de Bessel
# ---------------------------------------------------------------------------

def _first_bessel_zero(nu: float) -> float:
    if abs(nu - round(nu)) < 1e-14 and nu >= 0:
        return float(special.jn_zeros(int(round(nu)), 1)[0])
    grid = np.linspace(1e-3, nu + 10.0, 4000)
    vals = special.jv(nu, grid)
    i = int(np.flatnonzero(np.sign(vals[:-1]) != np.sign(vals[1:]))[0])
    return float(optimize.brentq(lambda z: special.jv(nu, z), grid[i], grid[i + 1], xtol=1e-15))


def oracle_zero_interval(length: float = 1.0) -> float:
    """λ₁ = π²/L² para V = 0"""
    return math.pi ** 2 / length ** 2


def oracle_example_III_interval() -> float:
    """λ₁ = 4z² com z a primeira raiz de J₀(z) = 2zJ₁(z) em (0,1)"""
    z = optimize.brentq(lambda z: special.j0(z) - 2.0 * z * special.j1(z), 0.1, 1.5, xtol=1e-15)
    return 4.0 * z * z


def oracle_example_I_ball(c: float, n: int = 3, radius: float = 1.0) -> float:
    """λ₁ = (j_{ν,1}/R)² com ν = √((n−2)²/4 − c)"""
    nu = math.sqrt(max(0.25 * (n - 2) ** 2 - c, 0.0))
    return (_first_bessel_zero(nu) / radius) ** 2


def oracle_layer_mu1(delta: float) -> float:
    """μ₁ da camada (0,δ) com peso d: j_{0,1}²/δ²"""
    return (_first_bessel_zero(0.0) / delta) ** 2
