"""
Geometria - domínios estratificados, distâncias d_k, "bolas" ℬ(x,r) e volumes ponderados V(x,r)

Formas suportadas têm distância em forma fechada: intervalo, retângulo [0,w1]x[0,w2],
disco e bola radial (malha 1D em ρ representando a bola n-dimensional).
Pontos podem chegar em coordenadas cartesianas (N, n) ou, para disco/bola, radiais (N, 1).
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping, Sequence

import numpy as np
import structlog
from scipy import integrate, special

from hardyheat.core.errors import (
    NoSuchStratum,
    NonIntegrableWeight,
    OutsideDomain,
    ParameterOutOfRange,
    RadiusTooLarge,
)

logger = structlog.get_logger(__name__)

DEFAULT_GAMMA = 1.5
_QUAD_EPSREL = 1e-10


class ShapeKind(str, Enum):
    INTERVAL = "interval"
    RECTANGLE = "rectangle"
    DISC = "disc"
    RADIAL_BALL = "radial_ball"


class StratumGeometry(str, Enum):
    FULL_BOUNDARY = "FullBoundary"
    POINT = "Point"
    FLAT_PIECE = "FlatPiece"


class BallKind(str, Enum):
    EUCLIDEAN = "Euclidean"
    DEFORMED_CUBE = "DeformedCube"


@dataclass(frozen=True)
class Shape:
    """Forma base do domínio"""

    kind: ShapeKind
    a: float = 0.0
    b: float = 1.0
    widths: tuple[float, ...] = ()
    radius: float = 1.0
    ambient_n: int = 2

    @property
    def dimension(self) -> int:
        if self.kind == ShapeKind.INTERVAL:
            return 1
        if self.kind == ShapeKind.RECTANGLE:
            return len(self.widths)
        if self.kind == ShapeKind.DISC:
            return 2
        return self.ambient_n

    @property
    def is_radial(self) -> bool:
        return self.kind in (ShapeKind.DISC, ShapeKind.RADIAL_BALL)


@dataclass(frozen=True)
class Stratum:
    """Estrato Γ_k da fronteira"""

    codim: int
    geometry: StratumGeometry
    label: str
    coords: tuple[float, ...] | None = None
    axis: int | None = None
    value: float | None = None


@dataclass(frozen=True)
class StratifiedDomain:
    """Domínio limitado com fronteira estratificada e constante de localização β"""

    shape: Shape
    strata: tuple[Stratum, ...]
    localization_beta: float
    gamma: float = DEFAULT_GAMMA

    def __post_init__(self):
        if not 0.0 < self.localization_beta < 1.0:
            raise ParameterOutOfRange("β de localização deve estar em (0,1)", beta=self.localization_beta)
        if not 1.0 < self.gamma < 2.0:
            raise ParameterOutOfRange("γ deve estar em (1,2)", gamma=self.gamma)
        labels = [s.label for s in self.strata]
        if len(set(labels)) != len(labels):
            raise ParameterOutOfRange("rótulos de estratos repetidos", labels=labels)
        _validate_shape(self.shape)
        for s in self.strata:
            _validate_stratum(self.shape, s)
        _validate_coverage(self.shape, self.strata)
        _validate_localization(self)

    @property
    def dimension(self) -> int:
        return self.shape.dimension

    @property
    def computational_dim(self) -> int:
        """Dimensão da malha: 1 para reduções radiais"""
        if self.shape.is_radial:
            return 1
        return self.shape.dimension

    def stratum(self, label: str) -> Stratum:
        for s in self.strata:
            if s.label == label:
                return s
        raise NoSuchStratum(f"estrato inexistente: {label}", label=label)

    def strata_of_codim(self, k: int) -> list[Stratum]:
        return [s for s in self.strata if s.codim == k]

    def describe(self) -> dict:
        return {
            "shape": self.shape.kind.value,
            "dimension": self.dimension,
            "localization_beta": self.localization_beta,
            "gamma": self.gamma,
            "strata": [
                {"label": s.label, "codim": s.codim, "geometry": s.geometry.value} for s in self.strata
            ],
        }


@dataclass(frozen=True)
class BallSpec:
    """Bola ℬ(x,r): euclidiana ou cubo deformado alinhado a um estrato"""

    center: tuple[float, ...]
    radius: float
    kind: BallKind
    gamma: float
    stratum: str | None = None

    def contains(self, dom: StratifiedDomain, points: np.ndarray) -> np.ndarray:
        """
        Pertinência amostral de pontos em ℬ(x,r)∩Ω

        Em representação radial usa a projeção radial da bola (casca |ρ-ρx| < r).
        """
        pts, radial = as_points(dom, points)
        c = np.asarray(self.center, dtype=float)
        if radial:
            rho_c = float(np.linalg.norm(c)) if c.size > 1 else float(c[0])
            inside = np.abs(pts[:, 0] - rho_c) < self.radius
        elif self.kind == BallKind.EUCLIDEAN:
            inside = np.linalg.norm(pts - c[None, :], axis=1) < self.radius
        else:
            inside = np.all(np.abs(pts - c[None, :]) < self.radius, axis=1)
        return inside & _in_closure(dom, pts, radial)

    def box(self, dom: StratifiedDomain) -> list[tuple[float, float]]:
        """Caixa envolvente recortada ao domínio, por eixo computacional"""
        c = np.asarray(self.center, dtype=float)
        shape = dom.shape
        if shape.kind == ShapeKind.INTERVAL:
            return [(max(shape.a, c[0] - self.radius), min(shape.b, c[0] + self.radius))]
        if shape.kind == ShapeKind.RECTANGLE:
            return [(max(0.0, c[j] - self.radius), min(w, c[j] + self.radius)) for j, w in enumerate(shape.widths)]
        rho_c = float(np.linalg.norm(c))
        return [(max(0.0, rho_c - self.radius), min(shape.radius, rho_c + self.radius))]


# ---------------------------------------------------------------------------
# Construtores
# ---------------------------------------------------------------------------

def interval(a: float = 0.0, b: float = 1.0, beta: float = 0.25, gamma: float = DEFAULT_GAMMA) -> StratifiedDomain:
    """Intervalo (a,b) com ∂Ω = {a,b} como um único estrato de codimensão 1"""
    shape = Shape(ShapeKind.INTERVAL, a=float(a), b=float(b))
    strata = (Stratum(1, StratumGeometry.FULL_BOUNDARY, "fronteira"),)
    return StratifiedDomain(shape, strata, beta, gamma)


def interval_endpoints(a: float = 0.0, b: float = 1.0, beta: float = 0.25,
                       gamma: float = DEFAULT_GAMMA) -> StratifiedDomain:
    """Intervalo com cada extremo como estrato próprio (FlatPiece)"""
    shape = Shape(ShapeKind.INTERVAL, a=float(a), b=float(b))
    strata = (
        Stratum(1, StratumGeometry.FLAT_PIECE, "esquerda", axis=0, value=float(a)),
        Stratum(1, StratumGeometry.FLAT_PIECE, "direita", axis=0, value=float(b)),
    )
    return StratifiedDomain(shape, strata, beta, gamma)


def rectangle(widths: Sequence[float] = (1.0, 1.0), beta: float = 0.25, gamma: float = DEFAULT_GAMMA,
              punctures: Iterable[Sequence[float]] = ()) -> StratifiedDomain:
    shape = Shape(ShapeKind.RECTANGLE, widths=tuple(float(w) for w in widths))
    strata = [Stratum(1, StratumGeometry.FULL_BOUNDARY, "fronteira")]
    for i, p in enumerate(punctures):
        strata.append(Stratum(shape.dimension, StratumGeometry.POINT, f"polo_{i}", coords=tuple(float(t) for t in p)))
    return StratifiedDomain(shape, tuple(strata), beta, gamma)


def disc(radius: float = 1.0, puncture: bool = False, beta: float = 0.25,
         gamma: float = DEFAULT_GAMMA) -> StratifiedDomain:
    shape = Shape(ShapeKind.DISC, radius=float(radius), ambient_n=2)
    strata = [Stratum(1, StratumGeometry.FULL_BOUNDARY, "fronteira")]
    if puncture:
        strata.append(Stratum(2, StratumGeometry.POINT, "origem", coords=(0.0, 0.0)))
    return StratifiedDomain(shape, tuple(strata), beta, gamma)


def radial_ball(radius: float = 1.0, ambient_n: int = 3, puncture: bool = True, beta: float = 0.25,
                gamma: float = DEFAULT_GAMMA) -> StratifiedDomain:
    shape = Shape(ShapeKind.RADIAL_BALL, radius=float(radius), ambient_n=int(ambient_n))
    strata = [Stratum(1, StratumGeometry.FULL_BOUNDARY, "fronteira")]
    if puncture:
        strata.append(Stratum(int(ambient_n), StratumGeometry.POINT, "origem", coords=(0.0,) * int(ambient_n)))
    return StratifiedDomain(shape, tuple(strata), beta, gamma)


# ---------------------------------------------------------------------------
# Validação
# ---------------------------------------------------------------------------

def _validate_shape(shape: Shape) -> None:
    if shape.kind == ShapeKind.INTERVAL and not shape.b > shape.a:
        raise ParameterOutOfRange("intervalo vazio", a=shape.a, b=shape.b)
    if shape.kind == ShapeKind.RECTANGLE:
        if len(shape.widths) < 2 or any(w <= 0 for w in shape.widths):
            raise ParameterOutOfRange("larguras do retângulo inválidas", widths=shape.widths)
    if shape.is_radial and shape.radius <= 0:
        raise ParameterOutOfRange("raio deve ser positivo", radius=shape.radius)
    if shape.kind == ShapeKind.RADIAL_BALL and shape.ambient_n < 2:
        raise ParameterOutOfRange("bola radial exige n ≥ 2; use o intervalo para n=1", ambient_n=shape.ambient_n)


def _validate_stratum(shape: Shape, s: Stratum) -> None:
    n = shape.dimension
    if not 1 <= s.codim <= n:
        raise ParameterOutOfRange("codimensão fora de 1..n", label=s.label, codim=s.codim)
    if s.geometry == StratumGeometry.POINT:
        if s.codim != n or s.coords is None or len(s.coords) != n:
            raise ParameterOutOfRange("estrato pontual exige codim n e coordenadas", label=s.label)
        p = np.asarray(s.coords, dtype=float)[None, :]
        if shape.kind == ShapeKind.RADIAL_BALL and float(np.linalg.norm(p)) > 0.0:
            raise ParameterOutOfRange("bola radial só admite polo na origem", label=s.label)
        if _boundary_distance(shape, p, radial=False)[0] <= 0.0:
            raise ParameterOutOfRange("estrato pontual fora do interior ou sobre uma face", label=s.label)
    elif s.geometry == StratumGeometry.FLAT_PIECE:
        if s.codim != 1 or s.axis is None or s.value is None:
            raise ParameterOutOfRange("FlatPiece exige codim 1, eixo e valor", label=s.label)
        faces = _faces(shape, s.axis)
        if not any(abs(s.value - f) < 1e-14 for f in faces):
            raise ParameterOutOfRange("FlatPiece não coincide com uma face", label=s.label, value=s.value)
    elif s.codim != 1:
        raise ParameterOutOfRange("FullBoundary tem codimensão 1", label=s.label)


def _faces(shape: Shape, axis: int) -> list[float]:
    if shape.kind == ShapeKind.INTERVAL:
        return [shape.a, shape.b] if axis == 0 else []
    if shape.kind == ShapeKind.RECTANGLE and 0 <= axis < len(shape.widths):
        return [0.0, shape.widths[axis]]
    return []


def _validate_coverage(shape: Shape, strata: Sequence[Stratum]) -> None:
    if any(s.geometry == StratumGeometry.FULL_BOUNDARY for s in strata):
        return
    if shape.is_radial:
        raise ParameterOutOfRange("disco/bola exigem o estrato FullBoundary")
    needed = {(j, f) for j in range(shape.dimension) for f in _faces(shape, j)}
    have = {(s.axis, s.value) for s in strata if s.geometry == StratumGeometry.FLAT_PIECE}
    if not needed <= have:
        raise ParameterOutOfRange("estratos de codim 1 não cobrem a fronteira", faltando=sorted(needed - have))


def stratum_separation(dom: StratifiedDomain, s: Stratum, t: Stratum) -> float:
    shape = dom.shape
    if s.geometry == StratumGeometry.POINT and t.geometry == StratumGeometry.POINT:
        return float(np.linalg.norm(np.subtract(s.coords, t.coords)))
    if t.geometry == StratumGeometry.POINT:
        s, t = t, s
    if s.geometry == StratumGeometry.POINT:
        p = np.asarray(s.coords, dtype=float)[None, :]
        return float(stratum_distance(dom, t, p, radial=False)[0])
    if s.geometry == StratumGeometry.FLAT_PIECE and t.geometry == StratumGeometry.FLAT_PIECE and s.axis == t.axis:
        return abs(s.value - t.value)
    # faces adjacentes ou fronteira inteira contra uma de suas partes
    del shape
    return 0.0


def _validate_localization(dom: StratifiedDomain) -> None:
    beta = dom.localization_beta
    for i, s in enumerate(dom.strata):
        for t in dom.strata[i + 1:]:
            sep = stratum_separation(dom, s, t)
            if sep < 2.0 * beta:
                raise ParameterOutOfRange(
                    "vizinhanças de estratos distintos se intersectam para δ ≤ β",
                    estratos=[s.label, t.label], separacao=sep, beta=beta,
                )


# ---------------------------------------------------------------------------
# Distâncias
# ---------------------------------------------------------------------------

def as_points(dom: StratifiedDomain, x) -> tuple[np.ndarray, bool]:
    """Normaliza pontos para (N, c); devolve também se a representação é radial"""
    pts = np.asarray(x, dtype=float)
    if pts.ndim == 0:
        pts = pts.reshape(1, 1)
    elif pts.ndim == 1:
        pts = pts.reshape(1, -1) if pts.size == dom.dimension or dom.shape.is_radial else pts.reshape(-1, 1)
    n = dom.dimension
    if dom.shape.is_radial:
        if pts.shape[1] == 1 and n != 1:
            return pts, True
        if pts.shape[1] != n:
            raise OutsideDomain("dimensão dos pontos incompatível", esperado=n, recebido=pts.shape[1])
        if dom.shape.kind == ShapeKind.RADIAL_BALL:
            return np.linalg.norm(pts, axis=1, keepdims=True), True
        return pts, False
    if pts.shape[1] != n:
        raise OutsideDomain("dimensão dos pontos incompatível", esperado=n, recebido=pts.shape[1])
    return pts, False


def _radius_of(pts: np.ndarray, radial: bool) -> np.ndarray:
    return np.abs(pts[:, 0]) if radial else np.linalg.norm(pts, axis=1)


def _boundary_distance(shape: Shape, pts: np.ndarray, radial: bool) -> np.ndarray:
    if shape.kind == ShapeKind.INTERVAL:
        return np.minimum(pts[:, 0] - shape.a, shape.b - pts[:, 0])
    if shape.kind == ShapeKind.RECTANGLE:
        w = np.asarray(shape.widths)[None, :]
        return np.min(np.minimum(pts, w - pts), axis=1)
    return shape.radius - _radius_of(pts, radial)


def stratum_distance(dom: StratifiedDomain, s: Stratum, pts: np.ndarray, radial: bool) -> np.ndarray:
    """Distância a um estrato em forma fechada"""
    if s.geometry == StratumGeometry.FULL_BOUNDARY:
        return _boundary_distance(dom.shape, pts, radial)
    if s.geometry == StratumGeometry.FLAT_PIECE:
        return np.abs(pts[:, s.axis] - s.value)
    if radial:
        return _radius_of(pts, radial)
    return np.linalg.norm(pts - np.asarray(s.coords, dtype=float)[None, :], axis=1)


def _in_closure(dom: StratifiedDomain, pts: np.ndarray, radial: bool, tol: float = 1e-12) -> np.ndarray:
    ok = _boundary_distance(dom.shape, pts, radial) >= -tol
    if radial:
        ok &= pts[:, 0] >= -tol
    return ok


def is_interior(dom: StratifiedDomain, x) -> np.ndarray:
    pts, radial = as_points(dom, x)
    ok = _boundary_distance(dom.shape, pts, radial) > 0.0
    if radial:
        ok &= pts[:, 0] >= 0.0
    for s in dom.strata:
        if s.geometry == StratumGeometry.POINT:
            ok &= stratum_distance(dom, s, pts, radial) > 0.0
    return ok


def distances_by_codim(dom: StratifiedDomain, pts: np.ndarray, radial: bool) -> dict[int, np.ndarray]:
    """d_k para cada codimensão presente (mínimo sobre os estratos de codim k)"""
    out: dict[int, np.ndarray] = {}
    for s in dom.strata:
        d = stratum_distance(dom, s, pts, radial)
        out[s.codim] = d if s.codim not in out else np.minimum(out[s.codim], d)
    return out


def distance(dom: StratifiedDomain, k: int | str, x):
    """
    d_k(x) = dist(x, Γ_k); com k="all" devolve d(x) = min_k d_k(x)

    Aceita um ponto ou um lote (N, c); devolve float ou array conforme a entrada.
    """
    pts, radial = as_points(dom, x)
    if not np.all(is_interior(dom, pts)):
        raise OutsideDomain("ponto fora do interior do domínio", k=k)
    by_codim = distances_by_codim(dom, pts, radial)
    if k == "all":
        d = np.min(np.vstack(list(by_codim.values())), axis=0)
    else:
        if int(k) not in by_codim:
            raise NoSuchStratum(f"não há estrato de codimensão {k}", k=k)
        d = by_codim[int(k)]
    single = np.ndim(x) <= 1 and pts.shape[0] == 1
    return float(d[0]) if single else d


def total_distance(dom: StratifiedDomain, pts: np.ndarray, radial: bool) -> np.ndarray:
    """d(x) sem checagem de interior (uso interno em quadraturas)"""
    by_codim = distances_by_codim(dom, pts, radial)
    return np.min(np.vstack(list(by_codim.values())), axis=0)


def sup_distance(dom: StratifiedDomain, label: str | None = None) -> float:
    """sup_Ω d(x) (ou sup de d_s para o estrato `label`)"""
    shape = dom.shape
    strata = [dom.stratum(label)] if label else list(dom.strata)
    has_point = any(s.geometry == StratumGeometry.POINT for s in strata)
    if shape.kind == ShapeKind.INTERVAL:
        if label and dom.stratum(label).geometry == StratumGeometry.FLAT_PIECE:
            return shape.b - shape.a
        return 0.5 * (shape.b - shape.a)
    if shape.is_radial:
        if label or not has_point:
            return shape.radius
        return 0.5 * shape.radius
    # retângulo: amostragem densa
    grids = np.meshgrid(*[np.linspace(0.0, w, 201) for w in shape.widths], indexing="ij")
    pts = np.column_stack([g.ravel() for g in grids])
    d = np.min(np.vstack([stratum_distance(dom, s, pts, False) for s in strata]), axis=0)
    return float(d.max())


# ---------------------------------------------------------------------------
# Bolas
# ---------------------------------------------------------------------------

def make_ball(dom: StratifiedDomain, x, r: float) -> BallSpec:
    """
    Constrói ℬ(x,r)

    Euclidiana quando nenhum estrato está a distância < γr, ou quando o estrato próximo
    é um polo em dimensão ≥ 2; caso contrário cubo deformado alinhado ao único estrato próximo.
    """
    if r <= 0.0:
        raise ParameterOutOfRange("raio deve ser positivo", r=r)
    if r >= dom.localization_beta:
        raise RadiusTooLarge("r deve ser menor que β de localização", r=r, beta=dom.localization_beta)
    pts, radial = as_points(dom, x)
    if not np.all(_in_closure(dom, pts, radial)):
        raise OutsideDomain("centro fora do fecho do domínio")
    center = tuple(float(t) for t in pts[0])
    near = [s for s in dom.strata if stratum_distance(dom, s, pts, radial)[0] < dom.gamma * r]
    if len(near) > 1:
        raise RadiusTooLarge("mais de um estrato a distância < γr", estratos=[s.label for s in near], r=r)
    if not near:
        return BallSpec(center, float(r), BallKind.EUCLIDEAN, dom.gamma)
    s = near[0]
    if s.geometry == StratumGeometry.POINT and dom.dimension >= 2:
        return BallSpec(center, float(r), BallKind.EUCLIDEAN, dom.gamma, stratum=s.label)
    return BallSpec(center, float(r), BallKind.DEFORMED_CUBE, dom.gamma, stratum=s.label)


# ---------------------------------------------------------------------------
# Volumes ponderados
# ---------------------------------------------------------------------------

def normalize_alphas(dom: StratifiedDomain, alphas) -> dict[int, float]:
    """Expoentes por codimensão; aceita lista (α_1, ..., α_n) ou mapa {k: α_k}"""
    if isinstance(alphas, Mapping):
        out = {int(k): float(v) for k, v in alphas.items()}
    else:
        out = {k + 1: float(a) for k, a in enumerate(alphas)}
    for k, a in out.items():
        if a <= -k / 2.0:
            raise NonIntegrableWeight(f"α_{k} = {a} ≤ -k/2 não é integrável", k=k, alpha=a)
    present = {s.codim for s in dom.strata}
    return {k: a for k, a in out.items() if k in present}


def _integral_min_power(lo: float, hi: float, faces: Sequence[float], cap: float, s: float) -> float:
    """∫_lo^hi min(min_i |y - p_i|, cap)^s dy, exato por partes"""
    if hi <= lo:
        return 0.0
    fs = sorted(faces)
    cuts = {lo, hi}
    for p in fs:
        cuts.add(p)
        if math.isfinite(cap):
            cuts.update((p - cap, p + cap))
    for p, q in zip(fs, fs[1:]):
        cuts.add(0.5 * (p + q))
    nodes = sorted(t for t in cuts if lo <= t <= hi)
    total = 0.0
    for u, v in zip(nodes, nodes[1:]):
        if v <= u:
            continue
        m = 0.5 * (u + v)
        if fs:
            i = int(np.argmin([abs(m - p) for p in fs]))
            dmin = abs(m - fs[i])
        else:
            dmin = math.inf
        if dmin >= cap:
            total += cap ** s * (v - u)
        else:
            p = fs[i]
            total += abs(abs(v - p) ** (s + 1.0) - abs(u - p) ** (s + 1.0)) / (s + 1.0)
    return total


def _theta_cap(theta: np.ndarray | float, m: int) -> np.ndarray:
    """Θ(θ) = ∫_0^θ sin^m φ dφ via beta incompleta regularizada"""
    theta = np.clip(np.asarray(theta, dtype=float), 0.0, math.pi)
    a = 0.5 * (m + 1)
    full = special.beta(a, 0.5)
    low = np.minimum(theta, math.pi - theta)
    part = 0.5 * full * special.betainc(a, 0.5, np.sin(low) ** 2)
    return np.where(theta <= 0.5 * math.pi, part, full - part)


def sphere_area(n: int) -> float:
    """|S^{n-1}|"""
    return 2.0 * math.pi ** (0.5 * n) / math.gamma(0.5 * n)


def _interval_volume(dom: StratifiedDomain, xc: float, r: float, al: dict[int, float]) -> float:
    shape = dom.shape
    lo, hi = max(shape.a, xc - r), min(shape.b, xc + r)
    s = 2.0 * al.get(1, 0.0)
    return _integral_min_power(lo, hi, [shape.a, shape.b], math.inf, s)


def _rectangle_volume(dom: StratifiedDomain, ball: BallSpec, al: dict[int, float]) -> float:
    shape = dom.shape
    if len(shape.widths) != 2:
        raise ParameterOutOfRange("volume ponderado só para retângulos planos", widths=shape.widths)
    w1, w2 = shape.widths
    x1, x2 = ball.center
    r = ball.radius
    s1 = 2.0 * al.get(1, 0.0)
    s2 = 2.0 * al.get(2, 0.0)
    poles = [np.asarray(p.coords) for p in dom.strata if p.geometry == StratumGeometry.POINT]
    euclid = ball.kind == BallKind.EUCLIDEAN
    lo2, hi2 = max(0.0, x2 - r), min(w2, x2 + r)

    def limits(y2: float) -> tuple[float, float]:
        if euclid:
            half = math.sqrt(max(r * r - (y2 - x2) ** 2, 0.0))
        else:
            half = r
        return max(0.0, x1 - half), min(w1, x1 + half)

    breaks = [t for t in (0.5 * w2, x2) if lo2 < t < hi2]
    if s2 == 0.0 or not poles:
        def inner(y2: float) -> float:
            lo1, hi1 = limits(y2)
            return _integral_min_power(lo1, hi1, [0.0, w1], min(y2, w2 - y2), s1)
    else:
        breaks += [float(p[1]) for p in poles if lo2 < p[1] < hi2]

        def inner(y2: float) -> float:
            lo1, hi1 = limits(y2)
            if hi1 <= lo1:
                return 0.0

            def f(y1: float) -> float:
                d1 = min(y1, w1 - y1, y2, w2 - y2)
                dp = min(math.hypot(y1 - p[0], y2 - p[1]) for p in poles)
                return d1 ** s1 * dp ** s2

            pts = sorted({t for t in [0.5 * w1] + [float(p[0]) for p in poles] if lo1 < t < hi1})
            val, _ = integrate.quad(f, lo1, hi1, points=pts or None, limit=200, epsabs=0.0, epsrel=_QUAD_EPSREL)
            return val

    breaks = sorted(set(breaks))
    val, _ = integrate.quad(inner, lo2, hi2, points=breaks or None, limit=400, epsabs=0.0, epsrel=_QUAD_EPSREL)
    return val


def _radial_volume(dom: StratifiedDomain, ball: BallSpec, al: dict[int, float]) -> float:
    shape = dom.shape
    n = shape.dimension
    R = shape.radius
    c = np.asarray(ball.center, dtype=float)
    rho_x = float(np.linalg.norm(c))
    r = ball.radius
    s1 = 2.0 * al.get(1, 0.0)
    sn = 2.0 * al.get(n, 0.0)
    off_origin = [s for s in dom.strata if s.geometry == StratumGeometry.POINT and np.linalg.norm(s.coords) > 0]
    if off_origin and sn != 0.0:
        raise ParameterOutOfRange("volume ponderado só com polo na origem", estratos=[s.label for s in off_origin])
    m = n - 2
    s_sphere = sphere_area(n - 1) if n >= 2 else 2.0

    if ball.kind == BallKind.DEFORMED_CUBE:
        theta_const = min(math.pi, r / rho_x) if rho_x > 0 else math.pi

        def theta_of(rho: float) -> float:
            return theta_const
    else:
        def theta_of(rho: float) -> float:
            if rho_x == 0.0 or rho <= r - rho_x:
                return math.pi
            cos_t = (rho * rho + rho_x * rho_x - r * r) / (2.0 * rho * rho_x)
            return math.acos(min(1.0, max(-1.0, cos_t)))

    lo = max(0.0, rho_x - r)
    hi = min(R, rho_x + r)
    cuts = sorted({lo, hi} | {t for t in (abs(rho_x - r), rho_x, r - rho_x) if lo < t < hi})
    total = 0.0
    for u, v in zip(cuts, cuts[1:]):
        if v <= u:
            continue
        left = u == 0.0
        right = v == R
        p_left = sn + n - 1 if left else 0.0
        p_right = s1 if right else 0.0

        def f(rho: float, left=left, right=right) -> float:
            val = s_sphere * float(_theta_cap(theta_of(rho), m))
            if not left:
                val *= rho ** (sn + n - 1)
            if not right:
                val *= (R - rho) ** s1
            return val

        if left or right:
            val, _ = integrate.quad(f, u, v, weight="alg", wvar=(p_left, p_right), limit=200,
                                    epsabs=0.0, epsrel=_QUAD_EPSREL)
        else:
            val, _ = integrate.quad(f, u, v, limit=200, epsabs=0.0, epsrel=_QUAD_EPSREL)
        total += val
    return total


def weighted_volume(dom: StratifiedDomain, x, r: float, alphas) -> float:
    """V(x,r) = ∫_{ℬ(x,r)∩Ω} ∏ d_k^{2α_k}(y) dy"""
    al = normalize_alphas(dom, alphas)
    ball = make_ball(dom, x, r)
    kind = dom.shape.kind
    if kind == ShapeKind.INTERVAL:
        vol = _interval_volume(dom, ball.center[0], ball.radius, al)
    elif kind == ShapeKind.RECTANGLE:
        vol = _rectangle_volume(dom, ball, al)
    else:
        vol = _radial_volume(dom, ball, al)
    if not vol > 0.0 or not math.isfinite(vol):
        raise NonIntegrableWeight("volume ponderado não positivo ou não finito", volume=vol, r=r)
    return vol


def volume_model(dom: StratifiedDomain, x, r: float, alphas) -> float:
    """Modelo ∏ (d_k(x) + r)^{2α_k} r^n do volume"""
    al = normalize_alphas(dom, alphas)
    pts, radial = as_points(dom, x)
    by_codim = distances_by_codim(dom, pts, radial)
    val = r ** dom.dimension
    for k, a in al.items():
        val *= (float(by_codim[k][0]) + r) ** (2.0 * a)
    return val


def volume_grid(dom: StratifiedDomain, n_points: int = 10, n_radii: int = 10) -> list[tuple[tuple[float, ...], float]]:
    """Grade determinística de (x, r): centros de um estrato ao interior, raios em (β/100, 0.45β)"""
    beta = dom.localization_beta
    radii = np.geomspace(beta / 100.0, 0.45 * beta, n_radii)
    shape = dom.shape
    if shape.kind == ShapeKind.INTERVAL:
        ts = np.linspace(shape.a, shape.a + 0.5 * (shape.b - shape.a), n_points)
        centers = [(float(t),) for t in ts]
    elif shape.kind == ShapeKind.RECTANGLE:
        w1, w2 = shape.widths[:2]
        ts = np.linspace(0.0, 0.5 * w1, n_points)
        centers = [(float(t), 0.5 * w2) for t in ts]
    else:
        ts = np.linspace(0.0, shape.radius, n_points)
        if shape.kind == ShapeKind.DISC:
            centers = [(float(t), 0.0) for t in ts]
        else:
            centers = [(float(t),) for t in ts]
    return [(c, float(r)) for c in centers for r in radii]


def sandwich_ratios(dom: StratifiedDomain, alphas, samples) -> np.ndarray:
    """V(x,r) / [∏(d_k(x)+r)^{2α_k} r^n] sobre as amostras"""
    return np.array([weighted_volume(dom, x, r, alphas) / volume_model(dom, x, r, alphas) for x, r in samples])


def doubling_constant(dom: StratifiedDomain, alphas, samples) -> float:
    """C_D = max V(x,2r)/V(x,r) sobre as amostras"""
    worst = 0.0
    for x, r in samples:
        ratio = weighted_volume(dom, x, 2.0 * r, alphas) / weighted_volume(dom, x, r, alphas)
        worst = max(worst, ratio)
    logger.debug("Constante de duplicação calculada", amostras=len(samples), c_d=worst)
    return worst
