"""
Semigrupo do calor discreto: Crank–Nicolson com partida de Rannacher, núcleo por síntese
espectral, certificado sanduíche, cota ultracontrativa e varredura de Harnack
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Mapping, Sequence

import numpy as np
import structlog
from scipy import linalg
from scipy.sparse.linalg import splu

from hardyheat.core.discretize import DiscreteForm
from hardyheat.core.errors import (
    EmptyGrid,
    FactorizationFailed,
    NonFiniteState,
    NonPositiveSolution,
    ParameterOutOfRange,
    TailNotConverged,
    UnboundedRatio,
)
from hardyheat.core.geometry import BallKind, StratifiedDomain, make_ball, stratum_distance
from hardyheat.core.spectral import GroundState

logger = structlog.get_logger(__name__)

DEFAULT_KERNEL_DENSE_LIMIT = 2000
DT_MAX = 1e-3
UNDERFLOW = 1e-250
MAX_RATIO_SPREAD = 1e6
GAUSSIAN_RATES = tuple(k / 16.0 for k in range(1, 33))


# ---------------------------------------------------------------------------
# Evolução temporal
# ---------------------------------------------------------------------------

def propagate(form: DiscreteForm, u0: np.ndarray, t: float, steps: int | None = None) -> np.ndarray:
    """
    Resolve M u̇ = −(A − P) u até o tempo t

    Crank–Nicolson precedido de dois passos de Euler implícito de meio passo (Rannacher);
    todos usam a mesma fatoração de M + (Δt/2)K.
    """
    if t <= 0.0:
        raise ParameterOutOfRange("t deve ser positivo", t=t)
    u = np.asarray(u0, dtype=float).copy()
    if not np.all(np.isfinite(u)):
        raise NonFiniteState("dado inicial não finito", step=0)
    steps = steps or max(4, math.ceil(t / DT_MAX))
    dt = t / steps
    K, M = form.K, form.Mf
    try:
        lu = splu((M + 0.5 * dt * K).tocsc())
    except RuntimeError as e:
        raise FactorizationFailed("fatoração de M + (Δt/2)K falhou", dt=dt, error=str(e))
    explicit = M - 0.5 * dt * K
    for step in range(steps + 1):
        if step < 2:
            u = lu.solve(M @ u)
        else:
            u = lu.solve(explicit @ u)
        if not np.all(np.isfinite(u)):
            raise NonFiniteState("estado não finito durante a evolução", step=step)
    return u


class HeatKernel:
    """
    Núcleo do calor discreto h(t,x,y) nos graus de liberdade livres

    Até `dense_limit` dofs usa a decomposição generalizada completa de (K, M);
    acima disso cada coluna é obtida propagando M⁻¹e_y no tempo.
    """

    def __init__(self, form: DiscreteForm, modes: int | None = None,
                 dense_limit: int = DEFAULT_KERNEL_DENSE_LIMIT, tail_tol: float = 1e-8):
        self.form = form
        self.eta = form.eta_nodes[form.free]
        self.tail_tol = tail_tol
        self.spectral = form.dofs <= dense_limit
        self.eigenvalues: np.ndarray | None = None
        self.modes: np.ndarray | None = None
        if self.spectral:
            w, V = linalg.eigh(form.K.toarray(), form.Mf.toarray())
            if modes is not None:
                w, V = w[:modes], V[:, :modes]
            self.eigenvalues, self.modes = w, V
            self._total_modes = form.dofs
        logger.info("HeatKernel inicializado", dofs=form.dofs, espectral=self.spectral)

    def _check_tail(self, t: float) -> None:
        w = self.eigenvalues
        if len(w) >= self._total_modes:
            return
        tail = (self._total_modes - len(w)) * math.exp(-(w[-1] - w[0]) * t)
        if tail > self.tail_tol:
            raise TailNotConverged("truncamento modal acima da tolerância", t=t, modos=len(w), cauda=tail)

    def matrix(self, t: float) -> np.ndarray:
        """H(t) no espaço de coeficientes: u(t) = H(t) M u0"""
        if not self.spectral:
            raise ParameterOutOfRange("matriz completa só na síntese espectral", dofs=self.form.dofs)
        self._check_tail(t)
        return (self.modes * np.exp(-self.eigenvalues * t)) @ self.modes.T

    def coefficient_column(self, y: int, t: float) -> np.ndarray:
        if self.spectral:
            self._check_tail(t)
            return self.modes @ (np.exp(-self.eigenvalues * t) * self.modes[y])
        e = np.zeros(self.form.dofs)
        e[y] = 1.0
        u0 = splu(self.form.Mf.tocsc()).solve(e)
        return propagate(self.form, u0, t)

    def column(self, y: int, t: float) -> np.ndarray:
        """h(t,·,y) nos dofs livres"""
        return self.eta * self.eta[y] * self.coefficient_column(y, t)

    def value(self, t: float, x: int, y: int) -> float:
        return float(self.column(y, t)[x])

    def evolve(self, c0: np.ndarray, times: Sequence[float]) -> list[np.ndarray]:
        """Coeficientes de u(t) para cada t (ordem crescente)"""
        M = self.form.Mf
        if self.spectral:
            proj = self.modes.T @ (M @ c0)
            return [self.modes @ (np.exp(-self.eigenvalues * t) * proj) for t in times]
        out, u, last = [], c0, 0.0
        for t in times:
            if t > last:
                u = propagate(self.form, u, t - last)
            out.append(u)
            last = t
        return out

    def chapman_kolmogorov(self, t: float, s: float) -> float:
        """max |H(t) M H(s) − H(t+s)| / max |H(t+s)|"""
        Ht, Hs, Hts = self.matrix(t), self.matrix(s), self.matrix(t + s)
        M = self.form.Mf
        return float(np.max(np.abs(Ht @ (M @ Hs) - Hts)) / np.max(np.abs(Hts)))

    def eigenmode_identity(self, gs: GroundState, t: float) -> float:
        """max |∫h(t,·,y)φ₁(y)dy − e^{−λ₁t}φ₁| / max φ₁"""
        c = self.evolve(gs.coef, [t])[0]
        target = math.exp(-gs.lambda1 * t) * gs.coef
        return float(np.max(np.abs(c - target)) / np.max(np.abs(gs.coef)))


def kernel_column(form: DiscreteForm, y: int, t: float, modes: int | None = None) -> np.ndarray:
    return HeatKernel(form, modes=modes).column(y, t)


def nearest_dof(form: DiscreteForm, point: Sequence[float]) -> int:
    nodes = form.mesh.nodes[form.free]
    return int(np.argmin(np.linalg.norm(nodes - np.asarray(point, dtype=float)[None, :], axis=1)))


# ---------------------------------------------------------------------------
# Certificados
# ---------------------------------------------------------------------------

@dataclass
class KernelCertificate:
    """Constantes do sanduíche de curto prazo, crossover T e dados de longo prazo"""

    C1: float
    C2: float
    C2_prime: float
    ratio_spread: float
    T: float
    long_time_onset: float | None
    long_spread: float | None
    samples: list[dict[str, float]] = field(default_factory=list)
    ultracontractive_C: float | None = None
    ultracontractive_exponent: float | None = None
    harnack: dict[str, Any] | None = None

    def to_dict(self) -> dict[str, Any]:
        return {
            "C1": self.C1,
            "C2": self.C2,
            "C2_prime": self.C2_prime,
            "ratio_spread": self.ratio_spread,
            "T": self.T,
            "long_time_onset": self.long_time_onset,
            "long_spread": self.long_spread,
            "ultracontractive_C": self.ultracontractive_C,
            "ultracontractive_exponent": self.ultracontractive_exponent,
            "harnack": self.harnack,
        }


def _dof_distances(form: DiscreteForm) -> dict[str, np.ndarray]:
    mesh = form.mesh
    nodes = mesh.nodes[form.free]
    return {s.label: stratum_distance(mesh.dom, s, nodes, mesh.radial) for s in mesh.dom.strata}


def _kernel_samples(kernel: HeatKernel, pairs: Sequence[tuple[int, int]], times: Sequence[float]):
    cols: dict[tuple[int, float], np.ndarray] = {}
    rows = []
    for t in times:
        for x, y in pairs:
            key = (y, t)
            if key not in cols:
                cols[key] = kernel.column(y, t)
            rows.append((t, x, y, float(cols[key][x])))
    return rows


def _coords(prefix: str, p: np.ndarray) -> dict[str, float]:
    return {f"{prefix}{k}": float(v) for k, v in enumerate(p)}


def fit_sandwich(kernel: HeatKernel, alphas: Mapping[str, float], n: int, pairs: Sequence[tuple[int, int]],
                 times: Sequence[float], long_times: Sequence[float] = (), gs: GroundState | None = None,
                 long_tol: float = 0.02) -> KernelCertificate:
    """
    Ajusta h ≈ ∏(1+√t/d_i(x))^{−α_i}(1+√t/d_i(y))^{−α_i} t^{−n/2} e^{−c|x−y|²/t}

    c é escolhido na grade {1/16, …, 2} minimizando a dispersão log da razão; C₁ e C₂' são
    a menor e a maior razão. Com `gs` e tempos longos, compara h e^{λ₁t}/(φ₁⊗φ₁).
    """
    form = kernel.form
    nodes = form.mesh.nodes[form.free]
    dists = _dof_distances(form)
    rows = [r for r in _kernel_samples(kernel, pairs, times) if r[3] > UNDERFLOW]
    if not rows:
        raise EmptyGrid("nenhuma amostra do núcleo acima do limiar de underflow")
    t = np.array([r[0] for r in rows])
    xi = np.array([r[1] for r in rows])
    yi = np.array([r[2] for r in rows])
    h = np.array([r[3] for r in rows])
    sq = np.sqrt(t)
    prefactor = t ** (-0.5 * n)
    for label, a in alphas.items():
        d = dists[label]
        prefactor = prefactor * (1.0 + sq / d[xi]) ** (-a) * (1.0 + sq / d[yi]) ** (-a)
    sep2 = np.sum((nodes[xi] - nodes[yi]) ** 2, axis=1)

    best = None
    for c in GAUSSIAN_RATES:
        ratio = h / (prefactor * np.exp(-c * sep2 / t))
        spread = float(np.log(ratio.max()) - np.log(ratio.min()))
        if best is None or spread < best[1]:
            best = (c, spread, ratio)
    c, spread, ratio = best
    if math.exp(spread) > MAX_RATIO_SPREAD:
        raise UnboundedRatio("razão sanduíche ilimitada", spread=math.exp(spread), c=c)
    model = prefactor * np.exp(-c * sep2 / t)
    samples = [
        {"t": float(a), **_coords("x", nodes[i]), **_coords("y", nodes[j]), "h": float(b), "model": float(m),
         "ratio": float(r)}
        for a, i, j, b, m, r in zip(t, xi, yi, h, model, ratio)
    ]

    T = float(max(times))
    onset = None
    long_spread = None
    if gs is not None and long_times:
        phi = gs.phi1[form.free]
        all_times = sorted(set(times) | set(long_times))
        short_by_t, long_by_t = {}, {}
        for tt in all_times:
            hs = np.array([r[3] for r in _kernel_samples(kernel, pairs, [tt])])
            ok = hs > UNDERFLOW
            if not np.any(ok):
                continue
            px = np.array([p[0] for p in pairs])[ok]
            py = np.array([p[1] for p in pairs])[ok]
            pre = tt ** (-0.5 * n) * np.exp(-c * np.sum((nodes[px] - nodes[py]) ** 2, axis=1) / tt)
            for label, a in alphas.items():
                d = dists[label]
                pre = pre * (1.0 + math.sqrt(tt) / d[px]) ** (-a) * (1.0 + math.sqrt(tt) / d[py]) ** (-a)
            rs = hs[ok] / pre
            rl = hs[ok] * math.exp(gs.lambda1 * tt) / (phi[px] * phi[py])
            short_by_t[tt] = rs.max() / rs.min()
            long_by_t[tt] = rl
        crossing = [tt for tt in sorted(long_by_t) if long_by_t[tt].max() / long_by_t[tt].min() <= short_by_t[tt]]
        T = float(crossing[0]) if crossing else float(max(long_by_t))
        later = [tt for tt in sorted(long_by_t) if tt >= T]
        for i, tt in enumerate(later):
            tail = np.concatenate([long_by_t[s] for s in later[i:]])
            if tail.max() / tail.min() <= 1.0 + long_tol:
                onset = float(tt)
                long_spread = float(tail.max() / tail.min())
                break
    cert = KernelCertificate(
        C1=float(ratio.min()), C2=float(c), C2_prime=float(ratio.max()), ratio_spread=float(math.exp(spread)),
        T=T, long_time_onset=onset, long_spread=long_spread, samples=samples,
    )
    logger.info("Sanduíche ajustado", C1=cert.C1, C2=cert.C2, C2_prime=cert.C2_prime, T=cert.T)
    return cert


def ultracontractive_exponent(n: int, alphas: Sequence[float]) -> float:
    """(n + 2A)/2 com A = max{α_1, …, α_n, 0}"""
    A = max([0.0, *alphas])
    return 0.5 * (n + 2.0 * A)


def ultracontractive_bound(kernel: HeatKernel, gs: GroundState, alphas: Mapping[str, float], n: int,
                           pairs: Sequence[tuple[int, int]], times: Sequence[float]) -> tuple[float, float]:
    """C = max h·t^{(n+2A)/2} e^{λ₁t} / (∏d^α(x) ∏d^α(y)) sobre a grade"""
    exponent = ultracontractive_exponent(n, list(alphas.values()))
    dists = _dof_distances(kernel.form)
    rows = [r for r in _kernel_samples(kernel, pairs, times) if r[3] > UNDERFLOW]
    if not rows:
        raise EmptyGrid("nenhuma amostra do núcleo acima do limiar de underflow")
    worst = 0.0
    for t, x, y, h in rows:
        w = 1.0
        for label, a in alphas.items():
            w *= dists[label][x] ** a * dists[label][y] ** a
        worst = max(worst, h * t ** exponent * math.exp(gs.lambda1 * t) / w)
    logger.info("Cota ultracontrativa", C=worst, expoente=exponent)
    return worst, exponent


# ---------------------------------------------------------------------------
# Harnack
# ---------------------------------------------------------------------------

@dataclass
class HarnackEntry:
    center: tuple[float, ...]
    radius: float
    sample: int
    ratio: float
    boundary_touching: bool

    def to_dict(self) -> dict[str, Any]:
        return {
            "center": list(self.center),
            "radius": self.radius,
            "sample": self.sample,
            "ratio": self.ratio,
            "boundary_touching": self.boundary_touching,
        }


def positive_initial_data(form: DiscreteForm, gs: GroundState, count: int, rng: np.random.Generator,
                          bumps: int = 3, floor: float = 1e-2) -> list[np.ndarray]:
    """Misturas aleatórias de bumps positivos somadas a um piso proporcional a φ₁"""
    nodes = form.mesh.nodes[form.free]
    lo, hi = nodes.min(axis=0), nodes.max(axis=0)
    out = []
    for _ in range(count):
        c = floor * gs.coef.copy()
        for _ in range(bumps):
            center = lo + (hi - lo) * rng.uniform(size=lo.shape)
            width = (hi - lo) * rng.uniform(0.05, 0.25)
            c += rng.uniform(0.5, 1.5) * np.exp(-np.sum(((nodes - center) / width) ** 2, axis=1))
        out.append(c)
    return out


def harnack_scan(form: DiscreteForm, gs: GroundState, centers: Sequence[Sequence[float]], radii: Sequence[float],
                 u0_samples: Sequence[np.ndarray], kernel: HeatKernel | None = None,
                 window_samples: int = 5, tol: float = 1e-10) -> tuple[float, list[HarnackEntry]]:
    """
    C_H = max de sup_{ℬ(x,r/2)×(r²/4,r²/2)} u/φ₁ / inf_{ℬ(x,r/2)×(3r²/4,r²)} u/φ₁

    Soluções locais vêm de soluções globais com dado inicial positivo.
    """
    dom: StratifiedDomain = form.mesh.dom
    kernel = kernel or HeatKernel(form)
    nodes = form.mesh.nodes[form.free]
    cphi = gs.coef
    entries: list[HarnackEntry] = []
    for r in radii:
        early = np.linspace(r * r / 4.0, r * r / 2.0, window_samples)
        late = np.linspace(3.0 * r * r / 4.0, r * r, window_samples)
        times = np.concatenate([early, late])
        for k, c0 in enumerate(u0_samples):
            states = kernel.evolve(c0, times)
            scale = np.max(np.abs(states[0]))
            for s in states:
                if np.min(s) < -tol * max(scale, 1.0):
                    raise NonPositiveSolution("solução ficou negativa", minimo=float(np.min(s)))
            v = [s / cphi for s in states]
            for x in centers:
                ball = make_ball(dom, x, 0.5 * r)
                inside = ball.contains(dom, nodes)
                if not np.any(inside):
                    continue
                sup_early = max(float(np.max(vv[inside])) for vv in v[:window_samples])
                inf_late = min(float(np.min(vv[inside])) for vv in v[window_samples:])
                if inf_late <= 0.0:
                    raise NonPositiveSolution("ínfimo tardio não positivo", centro=list(x), r=r)
                entries.append(HarnackEntry(
                    center=tuple(float(t) for t in x), radius=float(r), sample=k,
                    ratio=sup_early / inf_late, boundary_touching=ball.kind == BallKind.DEFORMED_CUBE,
                ))
    if not entries:
        raise EmptyGrid("nenhuma bola da varredura contém nós")
    c_h = max(e.ratio for e in entries)
    logger.info("Varredura de Harnack concluída", C_H=c_h, entradas=len(entries))
    return c_h, entries


def harnack_by_kind(entries: Sequence[HarnackEntry]) -> dict[str, float | None]:
    """C_H separado entre bolas interiores e bolas que tocam a fronteira; None se o grupo é vazio"""
    out: dict[str, float | None] = {}
    for nome, tocando in (("interior", False), ("boundary", True)):
        razoes = [e.ratio for e in entries if e.boundary_touching == tocando]
        out[nome] = max(razoes) if razoes else None
    return out
