"""Pontos de amostragem padrão: um interior e um junto ao primeiro estrato"""
from typing import List

from hardyheat.core.geometry import ShapeKind, StratifiedDomain


def pontos_padrao(dom: StratifiedDomain, offset: float = 0.02) -> List[List[float]]:
    shape = dom.shape
    if shape.kind == ShapeKind.INTERVAL:
        return [[0.5 * (shape.a + shape.b)], [shape.a + offset]]
    if shape.kind == ShapeKind.RECTANGLE:
        w1, w2 = shape.widths[:2]
        return [[0.5 * w1, 0.5 * w2], [offset, 0.5 * w2]]
    R = shape.radius
    return [[0.5 * R], [R - offset]]


def fracoes_amostra(dom: StratifiedDomain, fracoes=(0.02, 0.1, 0.3, 0.5)) -> List[List[float]]:
    """Pontos ao longo de uma transversal, do estrato ao interior"""
    shape = dom.shape
    if shape.kind == ShapeKind.INTERVAL:
        L = shape.b - shape.a
        return [[shape.a + f * L] for f in fracoes]
    if shape.kind == ShapeKind.RECTANGLE:
        w1, w2 = shape.widths[:2]
        return [[f * w1, 0.5 * w2] for f in fracoes]
    R = shape.radius
    return [[R * (1.0 - f)] for f in fracoes]
