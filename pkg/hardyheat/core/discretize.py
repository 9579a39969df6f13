"""
Malhas graduadas 1D/2D e montagem da forma quadrática discreta

Elementos lineares por partes (Q1 tensorial em 2D). Duas bases:

* "ground_state": u = η·v com η = ∏ q_s^{α_s} sobre os estratos singulares,
  montada na forma integrada ∫κη²|∇v|² − ∫η²(κΔη/η + V)v²;
* "plain": u linear por partes, Dirichlet nos estratos de codim 1 e nos polos singulares.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np
import structlog
from scipy import sparse

from hardyheat.core.errors import BudgetExceeded, ParameterOutOfRange, QuadratureBreakdown
from hardyheat.core.geometry import (
    BallKind,
    BallSpec,
    ShapeKind,
    StratifiedDomain,
    StratumGeometry,
    sphere_area,
    stratum_distance,
)
from hardyheat.core.potentials import ExponentEntry, PotentialSpec, match_entries

logger = structlog.get_logger(__name__)

DEFAULT_NODE_CAP = 250_000
GAUSS_ORDER = 4
SUBCELL_LEVELS = 30
SUBCELL_RATIO = 0.5

WeightFn = Callable[[np.ndarray, bool], np.ndarray]


@dataclass(frozen=True)
class GradedMesh:
    """Malha tensorial graduada geometricamente em direção aos estratos"""

    dom: StratifiedDomain
    axes: tuple[np.ndarray, ...]
    targets: tuple[tuple[float, ...], ...]
    h_min: float
    rho: float
    h_max: float
    grading: dict[str, tuple[float, int]] = field(default_factory=dict)
    cell_mask: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return len(self.axes)

    @property
    def radial(self) -> bool:
        return self.dom.shape.is_radial

    @property
    def jacobian_exponent(self) -> int:
        return self.dom.dimension - 1 if self.radial else 0

    @property
    def shape(self) -> tuple[int, ...]:
        return tuple(len(a) for a in self.axes)

    @property
    def node_count(self) -> int:
        return int(np.prod(self.shape))

    @property
    def nodes(self) -> np.ndarray:
        grids = np.meshgrid(*self.axes, indexing="ij")
        return np.column_stack([g.ravel() for g in grids])

    def describe(self) -> dict:
        return {
            "dim": self.dim,
            "radial": self.radial,
            "jacobian_exponent": self.jacobian_exponent,
            "nodes": self.node_count,
            "h_min": self.h_min,
            "rho": self.rho,
            "h_max": self.h_max,
            "grading": {k: {"rho": r, "layers": n} for k, (r, n) in self.grading.items()},
        }


# ---------------------------------------------------------------------------
# Malhas
# ---------------------------------------------------------------------------

def _axis_bounds(dom: StratifiedDomain) -> list[tuple[float, float]]:
    shape = dom.shape
    if shape.kind == ShapeKind.INTERVAL:
        return [(shape.a, shape.b)]
    if shape.kind == ShapeKind.RECTANGLE:
        return [(0.0, w) for w in shape.widths]
    return [(0.0, shape.radius)]


def _axis_targets(dom: StratifiedDomain) -> list[list[float]]:
    shape = dom.shape
    if shape.kind == ShapeKind.RECTANGLE:
        if any(s.geometry == StratumGeometry.POINT for s in dom.strata):
            raise ParameterOutOfRange("malhas de retângulo não suportam polos interiores")
        return [[0.0, w] for w in shape.widths]
    if shape.kind == ShapeKind.INTERVAL:
        return [[shape.a, shape.b]]
    # origem sempre recebe subdivisão de quadratura por causa do jacobiano ρ^{n−1}
    return [[0.0, shape.radius]]


def graded_axis(lo: float, hi: float, targets: Sequence[float], h_min: float, rho: float,
                 layers: int | None, h_max: float) -> tuple[np.ndarray, int]:
    tg = sorted({float(t) for t in targets if lo - 1e-15 <= t <= hi + 1e-15})
    anchors = sorted({lo, hi, *tg})
    pts = set(anchors)
    max_layers = 0
    for p in tg:
        idx = anchors.index(p)
        for side in (-1, 1):
            j = idx + side
            if j < 0 or j >= len(anchors):
                continue
            gap = abs(anchors[j] - p)
            limit = gap / 4.0 if anchors[j] in tg else gap / 2.0
            k = 0
            t = h_min
            while t <= limit and t * (1.0 - rho) <= h_max * (1.0 + 1e-12) and (layers is None or k < layers):
                pts.add(p + side * t)
                k += 1
                t = h_min * rho ** (-k)
            max_layers = max(max_layers, k)
    nodes = sorted(pts)
    out = [nodes[0]]
    for u, v in zip(nodes, nodes[1:]):
        m = max(1, math.ceil((v - u) / h_max - 1e-9))
        out.extend(u + (v - u) * np.arange(1, m + 1) / m)
    return np.asarray(out, dtype=float), max_layers


def build_mesh(dom: StratifiedDomain, spec: PotentialSpec | None, h_min: float, rho: float = 0.5,
               layers: int | None = None, h_max: float | None = None, grade: str = "geometric",
               node_cap: int = DEFAULT_NODE_CAP, bounds: Sequence[tuple[float, float]] | None = None,
               cell_mask: np.ndarray | None = None) -> GradedMesh:
    """
    Malha graduada com nós em h_min·ρ^{−k} a partir de cada estrato

    Com ρ = 1/2 as malhas são aninhadas: reduzir h_min pela metade acrescenta um nó por
    lado graduado e preserva os demais. `grade="none"` gera malha uniforme de passo h_min.
    """
    if h_min <= 0.0:
        raise ParameterOutOfRange("h_min deve ser positivo", h_min=h_min)
    if not 0.0 < rho < 1.0:
        raise ParameterOutOfRange("ρ deve estar em (0,1)", rho=rho)
    if dom.shape.kind == ShapeKind.RECTANGLE and dom.dimension != 2:
        raise ParameterOutOfRange("malhas retangulares só em 2D", n=dom.dimension)
    full = _axis_bounds(dom)
    bounds = list(bounds) if bounds is not None else full
    targets = _axis_targets(dom)
    axes = []
    layer_count = 0
    used_hmax = []
    for (lo, hi), tg in zip(bounds, targets):
        length = hi - lo
        hm = h_max if h_max is not None else min(length, full[len(axes)][1] - full[len(axes)][0]) / 32.0
        if grade == "none":
            m = max(1, math.ceil(length / h_min - 1e-9))
            axis = lo + length * np.arange(m + 1) / m
            k = 0
        else:
            axis, k = graded_axis(lo, hi, tg, h_min, rho, layers, max(hm, h_min))
        axes.append(axis)
        layer_count = max(layer_count, k)
        used_hmax.append(hm)
    total = int(np.prod([len(a) for a in axes]))
    if total > node_cap:
        raise BudgetExceeded("malha excede o orçamento de nós", nodes=total, cap=node_cap)
    grading = {s.label: (rho, layer_count) for s in dom.strata} if grade != "none" else {}
    mesh = GradedMesh(
        dom=dom,
        axes=tuple(axes),
        targets=tuple(tuple(t) for t in targets),
        h_min=float(h_min),
        rho=float(rho),
        h_max=float(max(used_hmax)),
        grading=grading,
        cell_mask=cell_mask,
    )
    logger.debug("Malha construída", nodes=total, h_min=h_min, layers=layer_count,
                 potencial=spec.name if spec else None)
    return mesh


def coarsen(mesh: GradedMesh) -> GradedMesh:
    """Malha aninhada mais grossa: nós de índice par em cada eixo (extremos preservados)"""
    axes = []
    for a in mesh.axes:
        c = a[::2]
        if c[-1] != a[-1]:
            c = np.append(c, a[-1])
        axes.append(c)
    mask = None
    if mesh.cell_mask is not None:
        mask = mesh.cell_mask[::2, ::2] if mesh.cell_mask.ndim == 2 else mesh.cell_mask[::2]
    return replace(mesh, axes=tuple(axes), h_min=2.0 * mesh.h_min, cell_mask=mask)


def local_mesh(dom: StratifiedDomain, ball: BallSpec, h_min: float, rho: float = 0.5,
               cells_per_axis: int = 32) -> GradedMesh:
    """Malha sobre ℬ(x,r)∩Ω; discos euclidianos em retângulos recebem máscara de células"""
    box = ball.box(dom)
    h_max = max(hi - lo for lo, hi in box) / cells_per_axis
    mesh = build_mesh(dom, None, min(h_min, h_max), rho=rho, h_max=h_max, bounds=box)
    if dom.shape.kind == ShapeKind.RECTANGLE and ball.kind == BallKind.EUCLIDEAN:
        xs, ys = mesh.axes
        cx = 0.5 * (xs[:-1] + xs[1:])
        cy = 0.5 * (ys[:-1] + ys[1:])
        gx, gy = np.meshgrid(cx, cy, indexing="ij")
        mask = np.hypot(gx - ball.center[0], gy - ball.center[1]) < ball.radius
        mesh = replace(mesh, cell_mask=mask)
    return mesh


# ---------------------------------------------------------------------------
# Quadratura
# ---------------------------------------------------------------------------

def _geometric_pieces(u: float, v: float, toward_left: bool) -> list[tuple[float, float]]:
    h = v - u
    fr = SUBCELL_RATIO ** np.arange(SUBCELL_LEVELS + 1)
    if toward_left:
        cuts = np.concatenate([[u], u + h * fr[::-1]])
    else:
        cuts = np.concatenate([v - h * fr, [v]])
    return list(zip(cuts[:-1], cuts[1:]))


def axis_rule(nodes: np.ndarray, targets: Sequence[float], order: int):
    gx, gw = np.polynomial.legendre.leggauss(order)
    qx, qw, qc = [], [], []
    tg = np.asarray(targets, dtype=float)
    for i in range(len(nodes) - 1):
        u, v = float(nodes[i]), float(nodes[i + 1])
        left = bool(np.any(np.abs(tg - u) < 1e-15))
        right = bool(np.any(np.abs(tg - v) < 1e-15))
        if left and right:
            m = 0.5 * (u + v)
            pieces = _geometric_pieces(u, m, True) + _geometric_pieces(m, v, False)
        elif left:
            pieces = _geometric_pieces(u, v, True)
        elif right:
            pieces = _geometric_pieces(u, v, False)
        else:
            pieces = [(u, v)]
        for s, e in pieces:
            if e <= s:
                continue
            qx.append(0.5 * (s + e) + 0.5 * (e - s) * gx)
            qw.append(0.5 * (e - s) * gw)
            qc.append(np.full(order, i))
    x = np.concatenate(qx)
    w = np.concatenate(qw)
    c = np.concatenate(qc).astype(int)
    h = nodes[c + 1] - nodes[c]
    t = (x - nodes[c]) / h
    rows = np.repeat(np.arange(len(x)), 2)
    cols = np.column_stack([c, c + 1]).ravel()
    n = len(nodes)
    B = sparse.csr_matrix((np.column_stack([1.0 - t, t]).ravel(), (rows, cols)), shape=(len(x), n))
    D = sparse.csr_matrix((np.column_stack([-1.0 / h, 1.0 / h]).ravel(), (rows, cols)), shape=(len(x), n))
    return x, w, c, B, D


@dataclass
class Quadrature:
    points: np.ndarray
    weights: np.ndarray
    B: sparse.csr_matrix
    grads: list[sparse.csr_matrix]


def build_quadrature(mesh: GradedMesh, order: int = GAUSS_ORDER) -> Quadrature:
    """Regra composta por eixo (Gauss por célula, subcélulas geométricas junto aos estratos)"""
    rules = [axis_rule(a, t, order) for a, t in zip(mesh.axes, mesh.targets)]
    if mesh.dim == 1:
        x, w, _, B, D = rules[0]
        pts = x[:, None]
        grads = [D]
        keep = None
    else:
        (x0, w0, c0, B0, D0), (x1, w1, c1, B1, D1) = rules
        pts = np.column_stack([np.repeat(x0, len(x1)), np.tile(x1, len(x0))])
        w = np.kron(w0, w1)
        B = sparse.kron(B0, B1, format="csr")
        grads = [sparse.kron(D0, B1, format="csr"), sparse.kron(B0, D1, format="csr")]
        keep = None
        if mesh.cell_mask is not None:
            keep = mesh.cell_mask[np.repeat(c0, len(x1)), np.tile(c1, len(x0))]
    if keep is not None:
        pts, w, B = pts[keep], w[keep], B[keep]
        grads = [g[keep] for g in grads]
    if mesh.radial:
        n = mesh.dom.dimension
        w = w * sphere_area(n) * pts[:, 0] ** (n - 1)
    return Quadrature(points=pts, weights=w, B=B.tocsr(), grads=[g.tocsr() for g in grads])


# ---------------------------------------------------------------------------
# Fator de ground state η
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class EtaFactor:
    """Fator q^α de η: face plana, esfera (R²−ρ²)/(2R) ou polo ρ"""

    kind: str
    alpha: float
    axis: int = 0
    value: float = 0.0
    sign: float = 1.0
    radius: float = 1.0


def eta_factors(dom: StratifiedDomain, entries: Mapping[str, ExponentEntry]) -> list[EtaFactor]:
    out: list[EtaFactor] = []
    shape = dom.shape
    for label, e in entries.items():
        if not e.singular:
            continue
        s = dom.stratum(label)
        a = e.alpha
        if s.geometry == StratumGeometry.FLAT_PIECE:
            lo, _ = _axis_bounds(dom)[s.axis]
            sign = 1.0 if abs(s.value - lo) < 1e-14 else -1.0
            out.append(EtaFactor("face", a, s.axis, s.value, sign))
        elif s.geometry == StratumGeometry.FULL_BOUNDARY:
            if shape.is_radial:
                out.append(EtaFactor("sphere", a, radius=shape.radius))
            else:
                for j, (lo, hi) in enumerate(_axis_bounds(dom)):
                    out.append(EtaFactor("face", a, j, lo, 1.0))
                    out.append(EtaFactor("face", a, j, hi, -1.0))
        else:
            if not shape.is_radial:
                raise ParameterOutOfRange("base de ground state só admite polos em reduções radiais", label=label)
            out.append(EtaFactor("pole", a))
    return out


def eta_eval(factors: Sequence[EtaFactor], pts: np.ndarray, radial: bool, n: int):
    """η, ∇η/η e Δη/η nos pontos (coordenadas computacionais)"""
    N, c = pts.shape
    log_eta = np.zeros(N)
    g = np.zeros((N, c))
    div = np.zeros(N)
    with np.errstate(divide="ignore", invalid="ignore"):
        for f in factors:
            if f.kind == "face":
                q = f.sign * (pts[:, f.axis] - f.value)
                dq = np.zeros((N, c))
                dq[:, f.axis] = f.sign
                lap = np.zeros(N)
            elif f.kind == "sphere":
                rho = pts[:, 0]
                q = (f.radius ** 2 - rho ** 2) / (2.0 * f.radius)
                dq = (-rho / f.radius)[:, None]
                lap = np.full(N, -n / f.radius)
            else:
                rho = pts[:, 0]
                q = rho
                dq = np.ones((N, 1))
                lap = (n - 1) / rho if radial else np.zeros(N)
            log_eta += f.alpha * np.log(q)
            g += f.alpha * dq / q[:, None]
            div += f.alpha * (lap / q - np.sum(dq ** 2, axis=1) / q ** 2)
        eta = np.exp(log_eta)
    return eta, g, np.sum(g ** 2, axis=1) + div


# ---------------------------------------------------------------------------
# Forma discreta
# ---------------------------------------------------------------------------

@dataclass
class DiscreteForm:
    """
    Matrizes A (rigidez), P (potencial), M (massa) e massas ponderadas nomeadas

    Todas as matrizes são N×N sobre os nós; `free` marca os graus de liberdade
    (nós de Dirichlet são eliminados ao restringir, nunca penalizados).
    """

    mesh: GradedMesh
    spec: PotentialSpec
    basis: str
    free: np.ndarray
    A: sparse.csr_matrix
    P: sparse.csr_matrix
    M: sparse.csr_matrix
    masses: dict[str, sparse.csr_matrix]
    quad: Quadrature
    eta_qp: np.ndarray
    eta_nodes: np.ndarray
    kappa: float | None
    entries: dict[str, ExponentEntry]

    @property
    def dofs(self) -> int:
        return int(self.free.sum())

    def restrict(self, mat: sparse.spmatrix) -> sparse.csr_matrix:
        idx = np.flatnonzero(self.free)
        return mat.tocsr()[idx][:, idx].tocsr()

    @property
    def K(self) -> sparse.csr_matrix:
        return self.restrict(self.A - self.P)

    @property
    def Mf(self) -> sparse.csr_matrix:
        return self.restrict(self.M)

    def embed(self, c: np.ndarray) -> np.ndarray:
        full = np.zeros(self.mesh.node_count)
        full[self.free] = c
        return full

    def nodal_u(self, c: np.ndarray) -> np.ndarray:
        """Valores nodais de u = η·v (zero nos nós de Dirichlet)"""
        full = self.embed(c)
        with np.errstate(invalid="ignore"):
            out = self.eta_nodes * full
        out[full == 0.0] = 0.0
        return out

    def u_qp(self, c: np.ndarray) -> np.ndarray:
        return self.eta_qp * (self.quad.B @ self.embed(c))

    def v_qp(self, c: np.ndarray) -> np.ndarray:
        return self.quad.B @ self.embed(c)

    def Q(self, c: np.ndarray) -> float:
        return float(c @ (self.K @ c))

    def norm2(self, c: np.ndarray) -> float:
        return float(c @ (self.Mf @ c))

    def weighted_norm2(self, c: np.ndarray, name: str) -> float:
        return float(c @ (self.restrict(self.masses[name]) @ c))

    def integrate(self, values_qp: np.ndarray) -> float:
        return float(np.sum(self.quad.weights * values_qp))

    def mass_matrix(self, weight_qp: np.ndarray, with_eta: bool = True) -> sparse.csr_matrix:
        w = self.quad.weights * weight_qp * (self.eta_qp ** 2 if with_eta else 1.0)
        B = self.quad.B
        return (B.T @ sparse.diags(w) @ B).tocsr()

    def stiffness_matrix(self, weight_qp: np.ndarray, with_eta: bool = True) -> sparse.csr_matrix:
        w = self.quad.weights * weight_qp * (self.eta_qp ** 2 if with_eta else 1.0)
        W = sparse.diags(w)
        out = None
        for G in self.quad.grads:
            term = G.T @ W @ G
            out = term if out is None else out + term
        return out.tocsr()

    def dump(self, directory: Path | str, prefix: str) -> list[Path]:
        """Matrizes A, P, M em texto de coordenadas (linha coluna valor)"""
        directory = Path(directory)
        directory.mkdir(parents=True, exist_ok=True)
        written = []
        for name, mat in (("A", self.A), ("P", self.P), ("M", self.M)):
            coo = self.restrict(mat).tocoo()
            path = directory / f"{prefix}_{name}.txt"
            with path.open("w", encoding="utf-8") as fh:
                for i, j, v in zip(coo.row, coo.col, coo.data):
                    fh.write(f"{i} {j} {float(v)!r}\n")
            written.append(path)
        return written


def _boundary_conditions(mesh: GradedMesh, entries: Mapping[str, ExponentEntry], basis: str,
                         eta_strata: set[str]) -> np.ndarray:
    dom = mesh.dom
    nodes = mesh.nodes
    free = np.ones(len(nodes), dtype=bool)
    for s in dom.strata:
        on = np.abs(stratum_distance(dom, s, nodes, mesh.radial)) < 1e-14
        if not np.any(on):
            continue
        e = entries[s.label]
        if basis == "ground_state" and s.label in eta_strata:
            dirichlet = e.alpha < -(s.codim - 2) / 2.0
        elif s.codim == 1:
            dirichlet = True
        else:
            dirichlet = e.singular
        if dirichlet:
            free &= ~on
    return free


def assemble(mesh: GradedMesh, spec: PotentialSpec, weights: Mapping[str, WeightFn] | None = None,
             basis: str = "auto", order: int = GAUSS_ORDER) -> DiscreteForm:
    """
    Monta A, P, M (e massas ponderadas) por quadratura composta

    basis="auto" usa a base de ground state quando o coeficiente é identidade
    ou escalar constante na redução radial; caso contrário a base simples.
    """
    dom = mesh.dom
    entries = match_entries(spec, dom)
    if mesh.radial:
        kappa = spec.radial_coeff
        if kappa is None:
            raise ParameterOutOfRange("potencial sem coeficiente radial efetivo", potencial=spec.name)
    else:
        kappa = 1.0 if spec.identity_coeff else None
    if basis == "auto":
        basis = "ground_state" if kappa is not None else "plain"
    if basis == "ground_state" and kappa is None:
        raise ParameterOutOfRange("base de ground state exige coeficiente escalar constante", potencial=spec.name)

    quad = build_quadrature(mesh, order)
    pts = quad.points
    n = dom.dimension
    V = spec.potential(pts, mesh.radial)
    if basis == "ground_state":
        factors = eta_factors(dom, entries)
        eta_qp, _, lap_over_eta = eta_eval(factors, pts, mesh.radial, n)
        with np.errstate(divide="ignore", invalid="ignore"):
            eta_nodes, _, _ = eta_eval(factors, mesh.nodes, mesh.radial, n)
        eta_strata = {label for label, e in entries.items() if e.singular}
    else:
        eta_qp = np.ones(len(pts))
        lap_over_eta = np.zeros(len(pts))
        eta_nodes = np.ones(mesh.node_count)
        eta_strata = set()

    free = _boundary_conditions(mesh, entries, basis, eta_strata)
    W = quad.weights
    eta2 = eta_qp ** 2
    B = quad.B
    if kappa is not None:
        A = None
        for G in quad.grads:
            term = G.T @ sparse.diags(W * kappa * eta2) @ G
            A = term if A is None else A + term
        pot = eta2 * (kappa * lap_over_eta + V)
    else:
        coeff = spec.coeff(pts)
        A = None
        for i, Gi in enumerate(quad.grads):
            for j, Gj in enumerate(quad.grads):
                term = Gi.T @ sparse.diags(W * coeff[:, i, j]) @ Gj
                A = term if A is None else A + term
        pot = V
    P = B.T @ sparse.diags(W * pot) @ B
    M = B.T @ sparse.diags(W * eta2) @ B
    masses: dict[str, sparse.csr_matrix] = {}
    for name, fn in (weights or {}).items():
        with np.errstate(divide="ignore", invalid="ignore"):
            w = fn(pts, mesh.radial)
        masses[name] = (B.T @ sparse.diags(W * eta2 * w) @ B).tocsr()

    form = DiscreteForm(
        mesh=mesh, spec=spec, basis=basis, free=free,
        A=A.tocsr(), P=P.tocsr(), M=M.tocsr(), masses=masses, quad=quad,
        eta_qp=eta_qp, eta_nodes=eta_nodes, kappa=kappa, entries=dict(entries),
    )
    for name, mat in [("A", form.A), ("P", form.P), ("M", form.M), *masses.items()]:
        block = form.restrict(mat)
        if not np.all(np.isfinite(block.data)):
            raise QuadratureBreakdown("integral não finita na montagem", matriz=name, potencial=spec.name)
    logger.info("Forma discreta montada", potencial=spec.name, base=basis, nodes=mesh.node_count,
                dofs=form.dofs, qp=len(W))
    return form
