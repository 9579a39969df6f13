"""
Estimadores de quocientes de Rayleigh para as desigualdades funcionais

Cada estimador devolve o mínimo discreto por nível de malha e um veredito
(BoundedBelow, DegeneratesToZero, Inconclusive). Denominadores quadráticos viram
autovalores generalizados; para q > 2 usa-se iteração de potência não linear
(passo z = K⁻¹∇F normalizado na norma de K) com backtracking de Armijo.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Callable, Mapping, Sequence

import numpy as np
import structlog
from scipy import linalg
from scipy.sparse import diags
from scipy.sparse.linalg import splu

from hardyheat.core.discretize import (
    DiscreteForm,
    assemble,
    axis_rule,
    build_mesh,
    build_quadrature,
    graded_axis,
    local_mesh,
)
from hardyheat.core.errors import (
    ExcludedExponent,
    NonConvergedMinimizer,
    NonFiniteEntropy,
    ParameterOutOfRange,
    ZeroDenominator,
)
from hardyheat.core.geometry import (
    ShapeKind,
    StratifiedDomain,
    StratumGeometry,
    distances_by_codim,
    make_ball,
    sphere_area,
    stratum_distance,
    sup_distance,
    total_distance,
    weighted_volume,
)
from hardyheat.core.potentials import PotentialSpec
from hardyheat.core.spectral import GroundState, smallest_eigenpair, solve_ground_state, x_weight

logger = structlog.get_logger(__name__)

DEFAULT_LEVELS = (2.0 ** -4, 2.0 ** -12, 2.0 ** -28)
RANDOM_RESTARTS = 5
BOUNDED_RATIO = 0.9
DEGENERATION_FACTOR = 2.0
ARMIJO_C1 = 1e-4


class Verdict(str, Enum):
    BOUNDED_BELOW = "BoundedBelow"
    DEGENERATES_TO_ZERO = "DegeneratesToZero"
    INCONCLUSIVE = "Inconclusive"


@dataclass
class QuotientReport:
    inequality: str
    params: dict[str, Any]
    levels: list[float]
    estimates: list[float]
    verdict: Verdict
    converged: bool = True
    snapshot: dict[str, list[float]] | None = None
    extra: dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> dict[str, Any]:
        return {
            "inequality": self.inequality,
            "params": self.params,
            "levels": self.levels,
            "estimates": self.estimates,
            "verdict": self.verdict.value,
            "converged": self.converged,
            "extra": self.extra,
        }


# ---------------------------------------------------------------------------
# Aritmética de limiares
# ---------------------------------------------------------------------------

def harnack_threshold(k: int) -> float:
    """−(k−2)/2"""
    return -(k - 2) / 2.0


def sobolev_threshold(k: int, n: int, q: float) -> float:
    """−(k−2)/2 − (n−k)(q−2)/(2(q+2)); também o valor excluído do bloco de codim k"""
    return -(k - 2) / 2.0 - (n - k) * (q - 2.0) / (2.0 * (q + 2.0))


def log_sobolev_threshold(k: int, n: int) -> float:
    """−(k−2)/2 − (n−k)/(2(n−1))"""
    if n < 2:
        raise ParameterOutOfRange("limiar log-Sobolev exige n ≥ 2", n=n)
    return -(k - 2) / 2.0 - (n - k) / (2.0 * (n - 1))


def beta_k(alpha: float, n: int, q: float) -> float:
    """β_k = α_k − 1 + (q−2)n/(2q)"""
    return alpha - 1.0 + (q - 2.0) * n / (2.0 * q)


def critical_sobolev_exponent(n: int) -> float:
    return math.inf if n <= 2 else 2.0 * n / (n - 2)


def sobolev_weight_exponent(q: float, n: int) -> float:
    """Expoente de d no denominador: (q(n−2) − 2n)/2"""
    return 0.5 * (q * (n - 2) - 2.0 * n)


def trace_admissible(q: float, n: int, alpha: float) -> bool:
    """q(n − 2 + 2α) ≤ 2(n + 2α), equivalente a 2α ≥ qβ"""
    return q * (n - 2 + 2.0 * alpha) <= 2.0 * (n + 2.0 * alpha) + 1e-12


def classify(estimates: Sequence[float]) -> Verdict:
    """Veredito a partir das estimativas por nível (mais grosso primeiro)"""
    e = list(estimates)
    if len(e) >= 3 and all(v > 0 for v in e[-3:]):
        a, b, c = e[-3:]
        if a >= DEGENERATION_FACTOR * b and b >= DEGENERATION_FACTOR * c:
            return Verdict.DEGENERATES_TO_ZERO
    if len(e) >= 2 and e[-1] > 0 and e[-2] > 0 and e[-1] >= BOUNDED_RATIO * e[-2]:
        return Verdict.BOUNDED_BELOW
    return Verdict.INCONCLUSIVE


# ---------------------------------------------------------------------------
# Minimização do quociente
# ---------------------------------------------------------------------------

@dataclass
class MinimizerResult:
    value: float
    coef: np.ndarray
    converged: bool
    iterations: int


def quotient_value(K, B, wq: np.ndarray, q: float, c: np.ndarray) -> float:
    """cᵀKc / (Σ wq |Bc|^q)^{2/q}; homogêneo de grau zero em c"""
    f = float(np.sum(wq * np.abs(B @ c) ** q))
    return float(c @ (K @ c)) / f ** (2.0 / q) if f > 0 else math.inf


def minimize_quotient(K, B, wq: np.ndarray, q: float, starts: Sequence[np.ndarray],
                      max_iter: int = 400, tol: float = 1e-9) -> MinimizerResult:
    """
    min cᵀKc / (Σ wq |Bc|^q)^{2/q}

    Passo z = K⁻¹∇F normalizado na norma de K, com F = Σ wq|Bc|^q convexa. O passo
    ao longo de z − c é aceito pela condição de Armijo sobre o quociente.
    """
    lu = splu(K.tocsc())

    def F(c):
        return float(np.sum(wq * np.abs(B @ c) ** q))

    def grad(c):
        u = B @ c
        return q * (B.T @ (wq * np.abs(u) ** (q - 2.0) * u))

    def knorm(c):
        return math.sqrt(max(float(c @ (K @ c)), 1e-300))

    def grad_R(c, gF):
        f = F(c)
        Kc = K @ c
        return 2.0 * Kc / f ** (2.0 / q) - (2.0 / q) * float(c @ Kc) * f ** (-2.0 / q - 1.0) * gF

    best: MinimizerResult | None = None
    for c in starts:
        c = np.asarray(c, dtype=float)
        c = c / knorm(c)
        r = quotient_value(K, B, wq, q, c)
        converged = False
        it = 0
        for it in range(1, max_iter + 1):
            gF = grad(c)
            z = lu.solve(gF)
            z = z / knorm(z)
            inclinacao = float(grad_R(c, gF) @ (z - c))
            step = 1.0
            cand, rc = c, r
            for _ in range(30):
                trial = c + step * (z - c)
                trial = trial / knorm(trial)
                rt = quotient_value(K, B, wq, q, trial)
                if inclinacao < 0.0:
                    aceito = rt <= r + ARMIJO_C1 * step * inclinacao
                else:
                    aceito = rt <= r * (1.0 + 1e-14)
                if aceito:
                    cand, rc = trial, rt
                    break
                step *= 0.5
            done = abs(r - rc) <= tol * abs(r)
            c, r = cand, rc
            if done:
                converged = True
                break
        if best is None or r < best.value:
            best = MinimizerResult(r, c, converged, it)
    return best


def _eigen_start(K, M) -> np.ndarray:
    _, v = smallest_eigenpair(K, M, dense_limit=10 ** 6)
    return np.abs(v)


def _starts(K, B, wq: np.ndarray, d_qp: np.ndarray, seed: int, base: np.ndarray | None) -> list[np.ndarray]:
    Mw = (B.T @ diags(wq) @ B).tocsr()
    Md = (B.T @ diags(wq / np.maximum(d_qp, 1e-300) ** 2) @ B).tocsr()
    out = [_eigen_start(K, Mw), _eigen_start(K, Md)]
    rng = np.random.default_rng(seed)
    ref = base if base is not None else out[0]
    for _ in range(RANDOM_RESTARTS):
        out.append(np.abs(ref) * rng.uniform(0.2, 1.0, size=ref.shape))
    return out


# ---------------------------------------------------------------------------
# Quocientes globais
# ---------------------------------------------------------------------------

@dataclass
class _Level:
    form: DiscreteForm
    gs: GroundState
    K: Any
    B: Any
    weights: np.ndarray
    dists: dict[int, np.ndarray]
    d: np.ndarray


def _global_level(dom: StratifiedDomain, spec: PotentialSpec, h_min: float, lam: float,
                  node_cap: int | None = None) -> _Level:
    kwargs = {"node_cap": node_cap} if node_cap else {}
    form = assemble(build_mesh(dom, spec, h_min, **kwargs), spec, basis="plain")
    gs = solve_ground_state(form)
    K = (form.K + (lam - gs.lambda1) * form.Mf).tocsr()
    pts = form.quad.points
    dists = distances_by_codim(dom, pts, form.mesh.radial)
    d = total_distance(dom, pts, form.mesh.radial)
    return _Level(form, gs, K, form.quad.B[:, np.flatnonzero(form.free)].tocsr(), form.quad.weights, dists, d)


def _snapshot(level: _Level, coef: np.ndarray) -> dict[str, list[float]]:
    nodes = level.form.mesh.nodes
    return {"x": nodes[:, 0].tolist(), "u": level.form.nodal_u(coef).tolist()}


def _run_levels(name: str, params: dict[str, Any], levels: Sequence[float],
                evaluate: Callable[[float], tuple[float, bool, _Level | None, np.ndarray | None]]) -> QuotientReport:
    estimates, converged = [], True
    snap = None
    for h in levels:
        value, ok, level, coef = evaluate(h)
        estimates.append(float(value))
        converged &= ok
        if level is not None and coef is not None:
            snap = _snapshot(level, coef)
    verdict = classify(estimates) if converged else Verdict.INCONCLUSIVE
    report = QuotientReport(name, params, [float(h) for h in levels], estimates, verdict, converged, snap)
    logger.info("Quociente estimado", desigualdade=name, estimativas=estimates, veredito=verdict.value)
    if not converged:
        logger.warning("Minimizador não convergiu; veredito inconclusivo", desigualdade=name)
    return report


def _check_sobolev_q(n: int, q: float) -> None:
    if not (q > 2.0 and q <= critical_sobolev_exponent(n) + 1e-12):
        raise ParameterOutOfRange("q fora de (2, 2n/(n−2)]", q=q, n=n)


def sobolev_weight(dom: StratifiedDomain, d: np.ndarray, dists: Mapping[int, np.ndarray], q: float, n: int,
                   log_factor: bool = False) -> np.ndarray:
    """Peso pontual do denominador: d^{(q(n−2)−2n)/2}, com X(d_n/D_n)^{q/2+1} se `log_factor`"""
    w = d ** sobolev_weight_exponent(q, n)
    if log_factor:
        pole = dom.strata_of_codim(dom.dimension)
        D_n = sup_distance(dom, pole[0].label)
        w = w * x_weight(dists[dom.dimension] / D_n) ** (0.5 * q + 1.0)
    return w


def _sobolev_dimension(dom: StratifiedDomain, ambient_n: int | None) -> int:
    if dom.dimension == 1:
        n = 3 if ambient_n is None else ambient_n
        if n < 2:
            raise ParameterOutOfRange("dimensão ambiente da redução deve ser ≥ 2", ambient_n=n)
        return n
    if ambient_n is not None and ambient_n != dom.dimension:
        raise ParameterOutOfRange("ambient_n só vale para o intervalo", ambient_n=ambient_n, n=dom.dimension)
    return dom.dimension


def sobolev_quotient(dom: StratifiedDomain, spec: PotentialSpec, q: float, lam: float = 1.0,
                     levels: Sequence[float] = DEFAULT_LEVELS, seed: int = 0,
                     log_factor: bool = False, ambient_n: int | None = None) -> QuotientReport:
    """
    (Q[u] + (λ−λ₁)∫u²) / (∫ d^{(q(n−2)−2n)/2} |u|^q)^{2/q}

    No intervalo o problema é a redução de um domínio n-dimensional: o n do peso
    e do intervalo de q vem de `ambient_n` (padrão 3). Com `log_factor` o peso
    ganha X(d_n/D_n)^{q/2+1}.
    """
    n = _sobolev_dimension(dom, ambient_n)
    _check_sobolev_q(n, q)
    if lam <= 0:
        raise ParameterOutOfRange("λ deve ser positivo", lam=lam)
    if log_factor and not dom.strata_of_codim(dom.dimension):
        raise ParameterOutOfRange("fator logarítmico exige estrato de codim n")

    def evaluate(h):
        level = _global_level(dom, spec, h, lam)
        wq = level.weights * sobolev_weight(dom, level.d, level.dists, q, n, log_factor)
        res = minimize_quotient(level.K, level.B, wq, q, _starts(level.K, level.B, wq, level.d, seed, level.gs.coef))
        if not res.converged:
            logger.warning("Minimização sem convergência", h_min=h, melhor=res.value)
        return res.value, res.converged, level, res.coef

    name = "log_corrected_sobolev" if log_factor else "sobolev"
    params = {"q": q, "lambda": lam, "n": n, "log_factor": log_factor,
              "alphas": {k: a for k, a in spec.alphas_by_codim(dom).items()},
              "admissible": sobolev_admissible(spec, dom, q, ambient_n)}
    return _run_levels(name, params, levels, evaluate)


def log_corrected_quotient(dom: StratifiedDomain, spec: PotentialSpec, q: float, lam: float = 1.0,
                           levels: Sequence[float] = DEFAULT_LEVELS, seed: int = 0) -> QuotientReport:
    """Sobolev com peso X(d_n/D_n)^{q/2+1}; exige α_n = −(n−2)/2 exatamente"""
    n = dom.dimension
    if n < 2:
        raise ParameterOutOfRange("quociente log-corrigido exige polo de codim n ≥ 2", n=n)
    alphas = spec.alphas_by_codim(dom)
    if n not in alphas or abs(alphas[n] - harnack_threshold(n)) > 1e-12:
        raise ParameterOutOfRange("quociente log-corrigido exige α_n = −(n−2)/2", alphas=alphas)
    return sobolev_quotient(dom, spec, q, lam, levels, seed, log_factor=True)


def critical_hardy_log(dom: StratifiedDomain, spec: PotentialSpec, lam: float = 1.0,
                       levels: Sequence[float] = DEFAULT_LEVELS, with_x: bool = True) -> QuotientReport:
    """
    Menor autovalor generalizado de (Q + (λ−λ₁)‖·‖², ∫X²(d/D)u²/d²)

    `with_x=False` é o controle com denominador ∫u²/d².
    """
    alphas = spec.alphas_by_codim(dom)
    for k, a in alphas.items():
        if a < harnack_threshold(k) - 1e-12:
            raise ParameterOutOfRange("α_k abaixo de −(k−2)/2", k=k, alpha=a)
    D = sup_distance(dom)

    def evaluate(h):
        level = _global_level(dom, spec, h, lam)
        w = 1.0 / level.d ** 2
        if with_x:
            w = w * x_weight(level.d / D) ** 2
        Mw = (level.B.T @ diags(level.weights * w) @ level.B).tocsr()
        val, coef = smallest_eigenpair(level.K, Mw, dense_limit=10 ** 6)
        return val, True, level, np.abs(coef)

    name = "critical_hardy_log" if with_x else "critical_hardy_control"
    return _run_levels(name, {"lambda": lam, "with_x": with_x, "alphas": alphas}, levels, evaluate)


# ---------------------------------------------------------------------------
# Log-Sobolev ponderada
# ---------------------------------------------------------------------------

def _entropy(form: DiscreteForm, coef: np.ndarray, weight_qp: np.ndarray) -> tuple[float, float]:
    """(∫u² ln(|u|/(‖u‖ ∏d^α)), ‖u‖²)"""
    u = form.u_qp(coef)
    nrm = form.integrate(u ** 2)
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = np.abs(u) / (math.sqrt(nrm) * weight_qp)
        integrand = np.where(u != 0.0, u ** 2 * np.log(ratio), 0.0)
    lhs = form.integrate(integrand)
    if not math.isfinite(lhs):
        raise NonFiniteEntropy("entropia não finita para a amostra", norma=nrm)
    return lhs, nrm


def _alpha_weight(form: DiscreteForm) -> tuple[np.ndarray, float]:
    dom = form.mesh.dom
    pts = form.quad.points
    w = np.ones(len(pts))
    alphas = []
    for s in dom.strata:
        a = form.entries[s.label].alpha
        alphas.append(a)
        w = w * stratum_distance(dom, s, pts, form.mesh.radial) ** a
    return w, max([0.0, *alphas])


def weighted_log_sobolev(form: DiscreteForm, gs: GroundState, eps_grid: Sequence[float] | None = None,
                         u_samples: Sequence[np.ndarray] | None = None, count: int = 20,
                         seed: int = 0,
                         ambient_n: int | None = None) -> dict[str, Any]:
    """
    K̂ = max_{u,ε} [∫u² ln(|u|/(‖u‖∏d^α)) − εQ[u]]/‖u‖² + ((n+2A)/4) ln ε

    Cada α_k deve exceder −(k−2)/2 − (n−k)/(2(n−1)), com n a dimensão ambiente
    (no intervalo, `ambient_n`, padrão 3); a inclinação usa o n computacional.
    """
    dom = form.mesh.dom
    n_amb = _sobolev_dimension(dom, ambient_n)
    for s in dom.strata:
        a = form.entries[s.label].alpha
        limiar = log_sobolev_threshold(s.codim, n_amb)
        if a <= limiar + 1e-12:
            raise ParameterOutOfRange("α_k não excede o limiar log-Sobolev", estrato=s.label, alpha=a,
                                      limiar=limiar, n=n_amb)
    eps_grid = list(eps_grid if eps_grid is not None else np.geomspace(1e-3, 1.0, 8))
    n = dom.dimension
    wqp, A = _alpha_weight(form)
    if u_samples is None:
        rng = np.random.default_rng(seed)
        nodes = form.mesh.nodes[form.free]
        lo, hi = nodes.min(axis=0), nodes.max(axis=0)
        u_samples = [gs.coef]
        for _ in range(count):
            c = np.zeros(form.dofs)
            for _ in range(3):
                center = lo + (hi - lo) * rng.uniform(size=lo.shape)
                width = (hi - lo) * rng.uniform(0.05, 0.3)
                c += rng.uniform(-0.5, 1.5) * np.exp(-np.sum(((nodes - center) / width) ** 2, axis=1))
            u_samples.append(c * gs.coef)
    slope = (n + 2.0 * A) / 4.0
    best = -math.inf
    for c in u_samples:
        lhs, nrm = _entropy(form, c, wqp)
        q = form.Q(c)
        for eps in eps_grid:
            best = max(best, (lhs - eps * q) / nrm + slope * math.log(eps))
    logger.info("Constante log-Sobolev estimada", K=best, amostras=len(u_samples), A=A)
    return {"K_hat": best, "A": A, "n": n, "ambient_n": n_amb, "eps_grid": eps_grid, "samples": len(u_samples)}


def log_sobolev_slope(form: DiscreteForm, label: str | None = None, eps_grid: Sequence[float] | None = None,
                      scales: Sequence[float] | None = None) -> dict[str, Any]:
    """
    Inclinação em ln ε da cota otimizada sobre a família u_s = η·(1 − d/s)²₊

    Esperado: −(n + 2A)/4.
    """
    if form.basis != "ground_state":
        raise ParameterOutOfRange("inclinação log-Sobolev exige a base de ground state")
    dom = form.mesh.dom
    s_ = dom.stratum(label) if label else dom.strata[0]
    eps_grid = np.asarray(eps_grid if eps_grid is not None else np.geomspace(1e-9, 1e-5, 9))
    mesh = form.mesh
    if scales is None:
        scales = np.geomspace(50.0 * mesh.h_min, 0.5 * dom.localization_beta, 80)
    nodes = mesh.nodes[form.free]
    d_nodes = stratum_distance(dom, s_, nodes, mesh.radial)
    wqp, A = _alpha_weight(form)
    family = []
    for s in scales:
        c = np.clip(1.0 - d_nodes / s, 0.0, None) ** 2
        if not np.any(c > 0):
            continue
        lhs, nrm = _entropy(form, c, wqp)
        family.append((lhs / nrm, form.Q(c) / nrm))
    bounds = [max(e - eps * q for e, q in family) for eps in eps_grid]
    slope, _ = np.polyfit(np.log(eps_grid), bounds, 1)
    n = dom.dimension
    expected = -(n + 2.0 * A) / 4.0
    logger.info("Inclinação log-Sobolev", inclinacao=float(slope), esperada=expected)
    return {"slope": float(slope), "expected": expected, "eps_grid": eps_grid.tolist(), "bounds": bounds}


# ---------------------------------------------------------------------------
# Problemas locais
# ---------------------------------------------------------------------------

def _check_local_alphas(dom: StratifiedDomain, alphas: Mapping[int, float]) -> None:
    for k, a in alphas.items():
        if a <= -k / 2.0:
            raise ParameterOutOfRange("α_k ≤ −k/2", k=k, alpha=a)
    if alphas.get(1, 0.0) < 0.0:
        raise ParameterOutOfRange("α₁ deve ser ≥ 0", alpha=alphas.get(1))


def _check_radii(dom: StratifiedDomain, radii: Sequence[float]) -> None:
    limite = 0.5 * dom.localization_beta
    for r in radii:
        if not 0.0 < r < limite:
            raise ParameterOutOfRange("raio da bola local fora de (0, β/2)", r=r, limite=limite)


def _local_problem(dom: StratifiedDomain, x, r: float, alphas: Mapping[int, float], h_min: float):
    ball = make_ball(dom, x, r)
    mesh = local_mesh(dom, ball, h_min)
    quad = build_quadrature(mesh)
    by_codim = distances_by_codim(dom, quad.points, mesh.radial)
    w = np.ones(len(quad.points))
    for k, a in alphas.items():
        if k in by_codim:
            w = w * by_codim[k] ** (2.0 * a)
    ww = quad.weights * w
    S = None
    for G in quad.grads:
        term = G.T @ diags(ww) @ G
        S = term if S is None else S + term
    M = (quad.B.T @ diags(ww) @ quad.B).tocsr()
    active = np.flatnonzero(M.diagonal() > 0)
    return ball, mesh, quad, ww, S.tocsr()[active][:, active], M[active][:, active], active


def local_poincare(dom: StratifiedDomain, alphas: Mapping[int, float], centers: Sequence, radii: Sequence[float],
                   h_min: float = 1e-6) -> dict[str, Any]:
    """
    C_P(x,r) = 1/(r²μ₂), μ₂ o menor autovalor não nulo do par de Neumann ponderado em ℬ(x,r)∩Ω
    """
    _check_local_alphas(dom, alphas)
    _check_radii(dom, radii)
    entries = []
    for x in centers:
        for r in radii:
            ball, _, _, _, S, M, _ = _local_problem(dom, x, r, alphas, h_min)
            w = linalg.eigh(S.toarray(), M.toarray(), eigvals_only=True, subset_by_index=[0, 1])
            mu2 = float(w[1])
            entries.append({"center": list(np.atleast_1d(x).astype(float)), "radius": float(r),
                            "kind": ball.kind.value, "C_P": 1.0 / (r * r * mu2)})
    worst = max(e["C_P"] for e in entries)
    spread = worst / min(e["C_P"] for e in entries)
    logger.info("Poincaré local", C_P=worst, dispersao=spread, bolas=len(entries))
    return {"C_P": worst, "spread": spread, "entries": entries}


def _moser_samples(mesh, active: np.ndarray, ball, count: int, rng: np.random.Generator) -> list[np.ndarray]:
    nodes = mesh.nodes[active]
    c = np.asarray(ball.center, dtype=float)
    if mesh.radial:
        c = np.array([np.linalg.norm(c)])
    r = ball.radius
    out = []
    for i in range(count):
        shift = np.zeros_like(c) if i == 0 else rng.uniform(-0.3, 0.3, size=c.shape) * r
        power = 2.0 if i == 0 else rng.uniform(1.5, 4.0)
        z = np.sum(((nodes - c - shift) / r) ** 2, axis=1)
        out.append(np.clip(1.0 - z, 0.0, None) ** power)
    return out


def local_moser(dom: StratifiedDomain, alphas: Mapping[int, float], nu: float, centers: Sequence,
                radii: Sequence[float], f_count: int = 8, h_min: float = 1e-6, seed: int = 0,
                f_samples: Sequence[np.ndarray] | None = None) -> dict[str, Any]:
    """
    C_M = max ∫|f|^{2(1+2/ν)}w / (r² V(x,r)^{−2/ν} ∫|∇f|²w (∫f²w)^{2/ν})
    """
    _check_local_alphas(dom, alphas)
    _check_radii(dom, radii)
    A = max([0.0, *alphas.values()])
    if nu < dom.dimension + 2.0 * A - 1e-12:
        raise ParameterOutOfRange("ν deve ser ≥ n + 2A", nu=nu, minimo=dom.dimension + 2.0 * A)
    rng = np.random.default_rng(seed)
    p = 2.0 * (1.0 + 2.0 / nu)
    entries = []
    for x in centers:
        for r in radii:
            ball, mesh, quad, ww, S, M, active = _local_problem(dom, x, r, alphas, h_min)
            V = weighted_volume(dom, x, r, alphas)
            B = quad.B[:, active]
            samples = f_samples if f_samples is not None else _moser_samples(mesh, active, ball, f_count, rng)
            for f in samples:
                f = np.asarray(f, dtype=float)
                l2 = float(f @ (M @ f))
                grad = float(f @ (S @ f))
                if l2 <= 0.0 or grad <= 0.0:
                    raise ZeroDenominator("amostra f identicamente nula", centro=list(np.atleast_1d(x)), r=r)
                lhs = float(np.sum(ww * np.abs(B @ f) ** p))
                ratio = lhs / (r * r * V ** (-2.0 / nu) * grad * l2 ** (2.0 / nu))
                entries.append({"center": list(np.atleast_1d(x).astype(float)), "radius": float(r),
                                "kind": ball.kind.value, "ratio": ratio})
    worst = max(e["ratio"] for e in entries)
    logger.info("Moser local", C_M=worst, amostras=len(entries))
    return {"C_M": worst, "nu": nu, "entries": entries}


# ---------------------------------------------------------------------------
# Bloco de codimensão k
# ---------------------------------------------------------------------------

def _layer_axis(dom: StratifiedDomain, k: int, delta: float, h_min: float):
    """Malha 1D normal ao estrato de codim k em Γ_k^δ, jacobiano radial e índice do nó no estrato"""
    shape = dom.shape
    strata = dom.strata_of_codim(k)
    if not strata:
        raise ParameterOutOfRange("estrato de codimensão ausente", k=k)
    s = strata[0]
    if s.geometry == StratumGeometry.POINT:
        if not shape.is_radial:
            raise ParameterOutOfRange("bloco pontual exige redução radial")
        nodes, _ = graded_axis(0.0, delta, [0.0], h_min, 0.5, None, delta / 32.0)
        n = dom.dimension
        return nodes, (lambda x: sphere_area(n) * x ** (n - 1)), 0
    if shape.is_radial:
        R = shape.radius
        nodes, _ = graded_axis(R - delta, R, [R], h_min, 0.5, None, delta / 32.0)
        n = dom.dimension
        return nodes, (lambda x: sphere_area(n) * x ** (n - 1)), len(nodes) - 1
    edge = shape.a if shape.kind == ShapeKind.INTERVAL else 0.0
    nodes, _ = graded_axis(edge, edge + delta, [edge], h_min, 0.5, None, delta / 32.0)
    return nodes, (lambda x: np.ones_like(x)), 0


def codim_block(dom: StratifiedDomain, k: int, q: float, alpha_k: float, delta: float,
                levels: Sequence[float] = DEFAULT_LEVELS, ambient_n: int | None = None,
                seed: int = 0) -> QuotientReport:
    """
    ∫_{Γ_k^δ} d_k^{2α}(|∇v|² + v²) / (∫_{Γ_k^δ} d_k^{qβ_k}|v|^q)^{2/q}

    Camada 1D normal ao estrato, sem condição de contorno: o peso d_k^{2α} decide o
    comportamento junto ao estrato. Com k = n e α = −(n−2)/2 o denominador recebe
    o fator X^{q/2+1}.
    """
    n = ambient_n or dom.dimension
    if not 1 <= k <= n:
        raise ParameterOutOfRange("k fora de 1..n", k=k, n=n)
    if not 0.0 < delta <= dom.localization_beta:
        raise ParameterOutOfRange("δ deve estar em (0, β]", delta=delta)
    excluded = sobolev_threshold(k, n, q)
    log_block = k == n and abs(alpha_k - harnack_threshold(n)) < 1e-12
    if not log_block and abs(alpha_k - excluded) < 1e-12:
        raise ExcludedExponent("α_k igual ao valor excluído", k=k, alpha=alpha_k, excluido=excluded)
    bk = beta_k(alpha_k, n, q)
    logx = (0.5 + 1.0 / q) * q

    def evaluate(h):
        nodes, jac, stratum_idx = _layer_axis(dom, k, delta, h)
        target = [nodes[stratum_idx]]
        x, w, _, B, D = axis_rule(nodes, target, 4)
        d = np.abs(x - target[0])
        wj = w * jac(x)
        num_w = wj * d ** (2.0 * alpha_k)
        K = (D.T @ diags(num_w) @ D + B.T @ diags(num_w) @ B).tocsr()
        den = wj * d ** (q * bk)
        if log_block:
            den = den * x_weight(d / delta) ** logx
        B = B.tocsr()
        res = minimize_quotient(K, B, den, q, _starts(K, B, den, np.maximum(d, 1e-300), seed, None))
        return res.value, res.converged, None, None

    params = {"k": k, "q": q, "alpha_k": alpha_k, "delta": delta, "n": n, "beta_k": bk,
              "excluded": excluded, "log_block": log_block,
              "trace_admissible": trace_admissible(q, n, alpha_k)}
    report = _run_levels("codim_block", params, levels, evaluate)
    return report


def sobolev_admissible(spec: PotentialSpec, dom: StratifiedDomain, q: float,
                       ambient_n: int | None = None) -> dict[int, bool]:
    """α_k > −(k−2)/2 − (n−k)(q−2)/(2(q+2)) por codimensão"""
    n = _sobolev_dimension(dom, ambient_n)
    return {k: a > sobolev_threshold(k, n, q) for k, a in spec.alphas_by_codim(dom).items()}


def refuse_nonconverged(report: QuotientReport) -> QuotientReport:
    """Converte um relatório sem convergência em erro (modo estrito)"""
    if not report.converged:
        raise NonConvergedMinimizer("minimizador não convergiu", desigualdade=report.inequality,
                                    melhor=min(report.estimates))
    return report


__all__ = [
    "Verdict",
    "QuotientReport",
    "classify",
    "minimize_quotient",
    "quotient_value",
    "sobolev_weight",
    "sobolev_quotient",
    "log_corrected_quotient",
    "critical_hardy_log",
    "weighted_log_sobolev",
    "log_sobolev_slope",
    "local_poincare",
    "local_moser",
    "codim_block",
    "harnack_threshold",
    "sobolev_threshold",
    "log_sobolev_threshold",
    "beta_k",
    "critical_sobolev_exponent",
    "sobolev_weight_exponent",
    "trace_admissible",
    "sobolev_admissible",
]
