"""
Catálogo de potenciais, expoentes previstos e elipticidade
"""
import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hardyheat.core import potentials
from hardyheat.core.errors import (
    AsymmetricCoefficient,
    HardyConstantExceeded,
    IncompatibleCoefficients,
    OverlappingSingularities,
    ParameterOutOfRange,
)


@pytest.mark.parametrize(
    "k, c, alpha",
    [(1, 0.0, 1.0), (1, 0.25, 0.5), (3, 0.0, 0.0), (3, 3.0 / 16.0, -0.25), (3, 0.25, -0.5), (2, 0.0, 0.0)],
)
def test_expoente_de_hardy(k, c, alpha):
    assert potentials.hardy_exponent(k, c) == pytest.approx(alpha, abs=1e-14)


def test_constante_acima_do_limiar():
    with pytest.raises(HardyConstantExceeded):
        potentials.hardy_exponent(3, 0.3)


@given(k=st.integers(min_value=1, max_value=6), frac=st.floats(min_value=0.0, max_value=1.0))
def test_expoente_nunca_abaixo_do_limiar_de_harnack(k, frac):
    c = frac * potentials.hardy_threshold(k)
    assert potentials.hardy_exponent(k, c) >= -(k - 2) / 2.0 - 1e-12


class TestExemplos:
    def test_exemplo_i_recusa_constante_supercritica(self):
        with pytest.raises(HardyConstantExceeded):
            potentials.example_I(3, [((0.0, 0.0, 0.0), 0.3)])

    def test_exemplo_i_exige_n_3(self):
        with pytest.raises(ParameterOutOfRange):
            potentials.example_I(2, [((0.0, 0.0), 0.0)])

    def test_exemplo_i_avalia_soma_de_polos(self):
        spec = potentials.example_I(3, [((0.0, 0.0, 0.0), 0.25)])
        v = spec.potential(np.array([[0.5, 0.0, 0.0]]), False)
        assert v[0] == pytest.approx(1.0)

    def test_exemplo_iii_no_intervalo(self, intervalo):
        spec = potentials.example_III(intervalo)
        assert spec.alphas_by_codim(intervalo) == {1: 0.5}
        assert spec.evaluate(intervalo, 0.1)[0] == pytest.approx(0.25 / 0.01)

    def test_exemplo_iii_recusa_polos(self, bola):
        with pytest.raises(ParameterOutOfRange):
            potentials.example_III(bola)

    def test_exemplo_iv_soma_fronteira_e_polo_critico(self, bola):
        spec = potentials.example_IV(bola)
        assert spec.alphas_by_codim(bola) == {1: 0.5, 3: -0.5}
        assert spec.name == "example_IV"

    @given(a=st.floats(min_value=-0.499, max_value=-1e-3))
    def test_exemplo_v_expoente_na_origem_igual_a(self, a):
        spec = potentials.example_V(a, 3)
        origem = [e for e in spec.predicted if e.codim == 3][0]
        assert origem.alpha == pytest.approx(a, abs=1e-9)

    def test_exemplo_v_fora_da_faixa(self):
        with pytest.raises(ParameterOutOfRange):
            potentials.example_V(0.1, 3)

    def test_exemplo_ii_so_catalogo(self):
        spec = potentials.example_II_catalog(4)
        assert dict(spec.predicted_alphas()) == {1: 0.5, 3: -0.5}
        assert spec.radial_coeff is None

    def test_escala_acima_do_limiar(self, intervalo):
        with pytest.raises(HardyConstantExceeded):
            potentials.scale_potential(potentials.example_III(intervalo), 2.0)

    def test_escala_recalcula_expoentes(self, intervalo):
        spec = potentials.scale_potential(potentials.example_III(intervalo), 0.75)
        esperado = 0.5 * (1.0 + math.sqrt(1.0 - 0.75))
        assert spec.alphas_by_codim(intervalo)[1] == pytest.approx(esperado)


class TestSoma:
    def test_soma_com_zero_devolve_o_outro(self, intervalo):
        p = potentials.example_III(intervalo)
        assert potentials.sum_spec(p, potentials.zero_spec(1)) is p
        assert potentials.sum_spec(potentials.zero_spec(1), p) is p

    def test_polos_coincidentes(self):
        p = potentials.example_I(3, [((0.0, 0.0, 0.0), 0.1)])
        with pytest.raises(OverlappingSingularities):
            potentials.sum_spec(p, p)

    def test_coeficientes_incompativeis(self):
        p = potentials.example_V(-0.25, 3)
        q = potentials.example_I(3, [((0.5, 0.0, 0.0), 0.1)])
        with pytest.raises(IncompatibleCoefficients):
            potentials.sum_spec(p, q)

    def test_potencial_somado(self):
        p = potentials.example_I(3, [((0.0, 0.0, 0.0), 0.1)])
        q = potentials.example_I(3, [((0.6, 0.0, 0.0), 0.2)])
        s = potentials.sum_spec(p, q)
        x = np.array([[0.3, 0.0, 0.0]])
        assert s.potential(x, False)[0] == pytest.approx(p.potential(x, False)[0] + q.potential(x, False)[0])
        assert len([e for e in s.predicted if e.singular]) == 2


class TestElipticidade:
    def test_exemplo_v_dentro_de_c0(self):
        spec = potentials.example_V(-0.5, 3)
        rng = np.random.default_rng(0)
        pts = rng.uniform(-0.57, 0.57, size=(200, 3))
        rep = potentials.check_ellipticity(spec, pts)
        assert rep.C0_verified
        assert rep.min_eig >= 2.0 / 5.0

    def test_coeficiente_assimetrico(self):
        spec = replace(
            potentials.zero_spec(2),
            coeff=lambda pts: np.broadcast_to(np.array([[1.0, 0.1], [0.0, 1.0]]), (len(pts), 2, 2)).copy(),
        )
        with pytest.raises(AsymmetricCoefficient):
            potentials.check_ellipticity(spec, np.zeros((3, 2)))


def test_catalogo_lista_expoentes():
    entradas = potentials.catalog(3)
    nomes = [e["name"] for e in entradas]
    assert nomes == ["example_I", "example_III", "example_IV", "example_V", "example_II"]
    for e in entradas:
        assert all("alpha" in p for p in e["predicted"])
