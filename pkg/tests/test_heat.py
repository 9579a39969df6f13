"""
Núcleo do calor discreto, sanduíche ajustado e varredura de Harnack
"""
import math

import numpy as np
import pytest

from hardyheat.core import geometry, heat, potentials
from hardyheat.core.discretize import assemble, build_mesh
from hardyheat.core.errors import ParameterOutOfRange, TailNotConverged
from hardyheat.core.spectral import solve_ground_state


def _serie_de_senos(x, y, t, termos=200):
    k = np.arange(1, termos + 1)
    return float(np.sum(2.0 * np.sin(k * math.pi * x) * np.sin(k * math.pi * y) * np.exp(-(k * math.pi) ** 2 * t)))


@pytest.fixture(scope="module")
def nucleo_zero(forma_zero):
    return heat.HeatKernel(forma_zero)


@pytest.fixture(scope="module")
def nucleo_iii(forma_exemplo_iii):
    return heat.HeatKernel(forma_exemplo_iii)


class TestNucleo:
    @pytest.mark.parametrize("x, y", [(0.5, 0.5), (0.3, 0.4), (0.1, 0.2)])
    def test_v_zero_coincide_com_serie_de_senos(self, forma_zero, nucleo_zero, x, y):
        nodes = forma_zero.mesh.nodes[forma_zero.free][:, 0]
        i, j = heat.nearest_dof(forma_zero, [x]), heat.nearest_dof(forma_zero, [y])
        esperado = _serie_de_senos(nodes[i], nodes[j], 0.05)
        assert nucleo_zero.value(0.05, i, j) == pytest.approx(esperado, rel=1e-3)

    def test_coluna_avulsa_igual_a_do_nucleo(self, forma_zero, nucleo_zero):
        y = heat.nearest_dof(forma_zero, [0.3])
        np.testing.assert_allclose(heat.kernel_column(forma_zero, y, 0.05), nucleo_zero.column(y, 0.05), rtol=1e-10)

    def test_simetria(self, nucleo_iii):
        H = nucleo_iii.matrix(0.01)
        np.testing.assert_allclose(H, H.T, atol=1e-12 * np.abs(H).max())

    def test_chapman_kolmogorov(self, nucleo_zero):
        assert nucleo_zero.chapman_kolmogorov(0.01, 0.02) < 1e-10

    def test_autofuncao_decai_com_lambda1(self, nucleo_zero, gs_zero):
        assert nucleo_zero.eigenmode_identity(gs_zero, 0.1) < 1e-8

    def test_truncamento_modal_insuficiente(self, forma_exemplo_iii):
        kernel = heat.HeatKernel(forma_exemplo_iii, modes=3)
        with pytest.raises(TailNotConverged):
            kernel.matrix(1e-4)

    def test_truncamento_suficiente_em_tempo_longo(self, forma_zero):
        kernel = heat.HeatKernel(forma_zero, modes=3)
        assert np.all(np.isfinite(kernel.matrix(10.0)))


class TestEvolucao:
    def test_crank_nicolson_concorda_com_sintese_espectral(self, forma_zero, gs_zero, nucleo_zero):
        rng = np.random.default_rng(1)
        c0 = heat.positive_initial_data(forma_zero, gs_zero, 1, rng)[0]
        espectral = nucleo_zero.evolve(c0, [0.05])[0]
        cn = heat.propagate(forma_zero, c0, 0.05)
        assert np.max(np.abs(cn - espectral)) <= 1e-3 * np.max(np.abs(espectral))

    def test_evolucao_por_propagacao_acima_do_limite_denso(self, forma_zero, gs_zero, nucleo_zero):
        rng = np.random.default_rng(2)
        c0 = heat.positive_initial_data(forma_zero, gs_zero, 1, rng)[0]
        propagado = heat.HeatKernel(forma_zero, dense_limit=10)
        assert not propagado.spectral
        a = propagado.evolve(c0, [0.02, 0.05])
        b = nucleo_zero.evolve(c0, [0.02, 0.05])
        for u, v in zip(a, b):
            assert np.max(np.abs(u - v)) <= 1e-3 * np.max(np.abs(v))

    @pytest.mark.parametrize("t", [0.0, -1.0])
    def test_tempo_nao_positivo(self, forma_zero, t):
        with pytest.raises(ParameterOutOfRange):
            heat.propagate(forma_zero, np.ones(forma_zero.dofs), t)


class TestCertificados:
    def test_sanduiche_no_exemplo_iii(self, forma_exemplo_iii, gs_exemplo_iii, nucleo_iii):
        pares = [
            (heat.nearest_dof(forma_exemplo_iii, [x]), heat.nearest_dof(forma_exemplo_iii, [y]))
            for x, y in [(0.02, 0.02), (0.05, 0.1), (0.2, 0.25), (0.5, 0.5), (0.45, 0.55)]
        ]
        cert = heat.fit_sandwich(
            nucleo_iii, {"fronteira": 0.5}, 1, pares, [0.01, 0.02, 0.04],
            long_times=[0.5, 1.0, 2.0], gs=gs_exemplo_iii,
        )
        assert 0.0 < cert.C1 <= cert.C2_prime
        assert cert.ratio_spread <= 100.0
        assert cert.C2 in heat.GAUSSIAN_RATES
        assert cert.long_time_onset is not None and cert.long_time_onset <= 2.0
        assert len(cert.samples) == 15
        assert {"x0", "y0"} <= set(cert.samples[0]) and "x1" not in cert.samples[0]
        assert set(cert.to_dict()) >= {"C1", "C2", "C2_prime", "T"}

    def test_amostras_guardam_todas_as_coordenadas(self):
        dom = geometry.rectangle((1.0, 1.0))
        form = assemble(build_mesh(dom, None, 2.0 ** -4, grade="none"), potentials.zero_spec(2))
        kernel = heat.HeatKernel(form)
        pares = [(heat.nearest_dof(form, [0.5, 0.5]), heat.nearest_dof(form, [0.4, 0.6]))]
        cert = heat.fit_sandwich(kernel, {}, 2, pares, [0.01, 0.02])
        nodes = form.mesh.nodes[form.free]
        amostra = cert.samples[0]
        assert {"x0", "x1", "y0", "y1"} <= set(amostra)
        assert [amostra["x0"], amostra["x1"]] == pytest.approx(nodes[pares[0][0]].tolist())
        assert [amostra["y0"], amostra["y1"]] == pytest.approx(nodes[pares[0][1]].tolist())

    @pytest.mark.parametrize(
        "n, alphas, esperado",
        [(1, [0.5], 1.0), (3, [-0.5], 1.5), (3, [-0.5, 0.25], 1.75), (2, [], 1.0)],
    )
    def test_expoente_ultracontrativo(self, n, alphas, esperado):
        assert heat.ultracontractive_exponent(n, alphas) == pytest.approx(esperado)

    def test_cota_ultracontrativa_finita(self, forma_exemplo_iii, gs_exemplo_iii, nucleo_iii):
        i = heat.nearest_dof(forma_exemplo_iii, [0.1])
        j = heat.nearest_dof(forma_exemplo_iii, [0.5])
        C, expoente = heat.ultracontractive_bound(
            nucleo_iii, gs_exemplo_iii, {"fronteira": 0.5}, 1, [(i, i), (i, j), (j, j)], [0.01, 0.1, 1.0],
        )
        assert expoente == pytest.approx(1.0)
        assert 0.0 < C < math.inf


class TestHarnack:
    def test_constante_finita_incluindo_bolas_na_fronteira(self, forma_exemplo_iii, gs_exemplo_iii, nucleo_iii):
        rng = np.random.default_rng(5)
        amostras = heat.positive_initial_data(forma_exemplo_iii, gs_exemplo_iii, 2, rng)
        c_h, entradas = heat.harnack_scan(
            forma_exemplo_iii, gs_exemplo_iii, [[0.05], [0.5], [0.95]], [0.1, 0.2], amostras, kernel=nucleo_iii,
        )
        assert 0.0 < c_h < math.inf
        assert len(entradas) == 3 * 2 * 2
        assert any(e.boundary_touching for e in entradas)
        assert c_h == max(e.ratio for e in entradas)

    def test_grupos_interior_e_fronteira(self, forma_exemplo_iii, gs_exemplo_iii, nucleo_iii):
        rng = np.random.default_rng(5)
        amostras = heat.positive_initial_data(forma_exemplo_iii, gs_exemplo_iii, 2, rng)
        c_h, entradas = heat.harnack_scan(
            forma_exemplo_iii, gs_exemplo_iii, [[0.02], [0.5]], [0.1], amostras, kernel=nucleo_iii,
        )
        grupos = heat.harnack_by_kind(entradas)
        assert grupos["interior"] == max(e.ratio for e in entradas if not e.boundary_touching)
        assert grupos["boundary"] == max(e.ratio for e in entradas if e.boundary_touching)
        assert max(grupos.values()) == c_h
        assert 0.1 <= grupos["boundary"] / grupos["interior"] <= 10.0

    def test_grupo_vazio_vira_none(self, forma_exemplo_iii, gs_exemplo_iii, nucleo_iii):
        amostras = heat.positive_initial_data(forma_exemplo_iii, gs_exemplo_iii, 1, np.random.default_rng(1))
        _, entradas = heat.harnack_scan(forma_exemplo_iii, gs_exemplo_iii, [[0.5]], [0.1], amostras, kernel=nucleo_iii)
        assert heat.harnack_by_kind(entradas)["boundary"] is None

    @pytest.mark.slow
    def test_grupos_estaveis_entre_niveis(self, intervalo, forma_exemplo_iii, gs_exemplo_iii, nucleo_iii):
        spec = potentials.example_III(intervalo)
        grossa = assemble(build_mesh(intervalo, spec, 2.0 ** -11), spec)
        gs_grossa = solve_ground_state(grossa)
        grupos = []
        for form, gs, kernel in [(grossa, gs_grossa, heat.HeatKernel(grossa)),
                                 (forma_exemplo_iii, gs_exemplo_iii, nucleo_iii)]:
            amostras = heat.positive_initial_data(form, gs, 3, np.random.default_rng(7))
            _, entradas = heat.harnack_scan(form, gs, [[0.02], [0.5]], [0.1], amostras, kernel=kernel)
            grupos.append(heat.harnack_by_kind(entradas))
        for chave in ("interior", "boundary"):
            assert grupos[1][chave] == pytest.approx(grupos[0][chave], rel=0.2)
