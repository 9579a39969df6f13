"""
Distâncias, bolas e volumes ponderados
"""
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hardyheat.core import geometry
from hardyheat.core.errors import (
    NoSuchStratum,
    NonIntegrableWeight,
    OutsideDomain,
    ParameterOutOfRange,
    RadiusTooLarge,
)
from hardyheat.core.geometry import BallKind

interior = st.floats(min_value=1e-6, max_value=1.0 - 1e-6, allow_nan=False, allow_infinity=False)


class TestDistancias:
    @given(x=interior)
    def test_intervalo_distancia_ao_extremo_mais_proximo(self, intervalo, x):
        assert geometry.distance(intervalo, 1, x) == pytest.approx(min(x, 1.0 - x), abs=1e-15)
        assert geometry.distance(intervalo, "all", x) == pytest.approx(min(x, 1.0 - x), abs=1e-15)

    @given(x=interior, y=interior)
    def test_retangulo_distancia_minima_as_faces(self, x, y):
        dom = geometry.rectangle((1.0, 1.0))
        esperado = min(x, 1.0 - x, y, 1.0 - y)
        assert geometry.distance(dom, 1, [x, y]) == pytest.approx(esperado, abs=1e-15)

    @given(r=st.floats(min_value=1e-4, max_value=0.99), theta=st.floats(min_value=0.0, max_value=2 * math.pi))
    def test_bola_radial_polo_e_fronteira(self, bola, r, theta):
        p = [r * math.cos(theta), r * math.sin(theta), 0.0]
        assert geometry.distance(bola, 3, p) == pytest.approx(r, rel=1e-12)
        assert geometry.distance(bola, 1, p) == pytest.approx(1.0 - r, abs=1e-12)

    def test_lote_devolve_array(self, intervalo):
        d = geometry.distance(intervalo, 1, np.array([[0.1], [0.7]]))
        np.testing.assert_allclose(d, [0.1, 0.3])

    @pytest.mark.parametrize("x", [0.0, 1.0, 1.5, -0.2])
    def test_fora_do_interior(self, intervalo, x):
        with pytest.raises(OutsideDomain):
            geometry.distance(intervalo, 1, x)

    def test_codimensao_ausente(self, intervalo):
        with pytest.raises(NoSuchStratum):
            geometry.distance(intervalo, 2, 0.5)

    def test_polo_da_bola_fora_do_interior(self, bola):
        with pytest.raises(OutsideDomain):
            geometry.distance(bola, 1, [0.0, 0.0, 0.0])

    def test_rotulo_inexistente(self, intervalo):
        with pytest.raises(NoSuchStratum):
            intervalo.stratum("polo")


class TestConstrucao:
    def test_beta_fora_de_intervalo(self):
        with pytest.raises(ParameterOutOfRange):
            geometry.interval(0.0, 1.0, beta=1.5)

    def test_polo_perto_da_fronteira_viola_localizacao(self):
        with pytest.raises(ParameterOutOfRange):
            geometry.rectangle((1.0, 1.0), beta=0.25, punctures=[(0.2, 0.5)])

    def test_bola_radial_exige_n_maior_que_um(self):
        with pytest.raises(ParameterOutOfRange):
            geometry.radial_ball(1.0, ambient_n=1)

    def test_extremos_como_estratos_proprios(self):
        dom = geometry.interval_endpoints(0.0, 1.0, beta=0.25)
        assert [s.label for s in dom.strata_of_codim(1)] == ["esquerda", "direita"]
        assert geometry.distance(dom, 1, 0.2) == pytest.approx(0.2)

    def test_sup_distancia(self, intervalo, bola):
        assert geometry.sup_distance(intervalo) == pytest.approx(0.5)
        assert geometry.sup_distance(bola) == pytest.approx(0.5)
        assert geometry.sup_distance(bola, "origem") == pytest.approx(1.0)


class TestBolas:
    def test_bola_interior_euclidiana(self, intervalo):
        ball = geometry.make_ball(intervalo, 0.5, 0.1)
        assert ball.kind == BallKind.EUCLIDEAN
        assert ball.stratum is None

    def test_bola_junto_a_fronteira_vira_cubo(self, intervalo):
        ball = geometry.make_ball(intervalo, 0.05, 0.1)
        assert ball.kind == BallKind.DEFORMED_CUBE
        assert ball.stratum == "fronteira"

    def test_bola_no_polo_continua_euclidiana(self, bola):
        ball = geometry.make_ball(bola, [0.01, 0.0, 0.0], 0.05)
        assert ball.kind == BallKind.EUCLIDEAN
        assert ball.stratum == "origem"

    def test_raio_acima_de_beta(self, intervalo):
        with pytest.raises(RadiusTooLarge):
            geometry.make_ball(intervalo, 0.5, 0.25)

    def test_raio_nao_positivo(self, intervalo):
        with pytest.raises(ParameterOutOfRange):
            geometry.make_ball(intervalo, 0.5, 0.0)

    def test_pertinencia(self, intervalo):
        ball = geometry.make_ball(intervalo, 0.5, 0.1)
        dentro = ball.contains(intervalo, np.array([[0.45], [0.59], [0.61]]))
        assert dentro.tolist() == [True, True, False]


class TestVolumes:
    @settings(max_examples=60, deadline=None)
    @given(
        alpha=st.floats(min_value=-0.45, max_value=2.0),
        x=st.floats(min_value=0.0, max_value=0.2),
        r=st.floats(min_value=1e-3, max_value=0.1),
    )
    def test_intervalo_coincide_com_primitiva(self, intervalo, alpha, x, r):
        s = 2.0 * alpha
        lo, hi = max(0.0, x - r), x + r
        exato = (hi ** (s + 1.0) - lo ** (s + 1.0)) / (s + 1.0)
        assert geometry.weighted_volume(intervalo, x, r, [alpha]) == pytest.approx(exato, rel=1e-10)

    def test_intervalo_casos_fechados(self, intervalo):
        assert geometry.weighted_volume(intervalo, 0.05, 0.02, [0.5]) == pytest.approx(0.002, rel=1e-10)
        assert geometry.weighted_volume(intervalo, 0.01, 0.02, [0.5]) == pytest.approx(0.00045, rel=1e-10)
        assert geometry.weighted_volume(intervalo, 0.5, 0.1, [0.0]) == pytest.approx(0.2, rel=1e-12)

    def test_peso_nao_integravel(self, intervalo):
        with pytest.raises(NonIntegrableWeight):
            geometry.weighted_volume(intervalo, 0.1, 0.05, [-0.5])

    def test_disco_sem_peso_no_retangulo(self):
        dom = geometry.rectangle((1.0, 1.0))
        vol = geometry.weighted_volume(dom, [0.5, 0.5], 0.05, {1: 0.0})
        assert vol == pytest.approx(math.pi * 0.05 ** 2, rel=1e-6)

    @pytest.mark.parametrize("a", [0.0, -0.25, -0.5])
    def test_bola_centrada_no_polo(self, bola, a):
        r = 0.1
        exato = 4.0 * math.pi * r ** (3.0 + 2.0 * a) / (3.0 + 2.0 * a)
        assert geometry.weighted_volume(bola, [0.0], r, {3: a}) == pytest.approx(exato, rel=1e-8)

    def test_sanduiche_com_dispersao_limitada(self, intervalo):
        amostras = geometry.volume_grid(intervalo, 10, 10)
        assert len(amostras) == 100
        razoes = geometry.sandwich_ratios(intervalo, {1: 0.5}, amostras)
        assert np.all(razoes > 0)
        assert razoes.max() / razoes.min() <= 50.0

    def test_duplicacao_estavel_ao_dobrar_amostras(self, intervalo):
        c1 = geometry.doubling_constant(intervalo, {1: 0.5}, geometry.volume_grid(intervalo, 5, 10))
        c2 = geometry.doubling_constant(intervalo, {1: 0.5}, geometry.volume_grid(intervalo, 10, 10))
        assert c1 == pytest.approx(4.0, rel=1e-8)
        assert abs(c2 / c1 - 1.0) <= 0.05
