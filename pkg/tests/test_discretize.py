"""
Malhas graduadas, quadratura e montagem da forma discreta
"""
import numpy as np
import pytest

from hardyheat.core import geometry, potentials
from hardyheat.core.discretize import assemble, build_mesh, build_quadrature, coarsen
from hardyheat.core.errors import BudgetExceeded, ParameterOutOfRange


class TestMalhas:
    def test_graduacao_geometrica_junto_aos_extremos(self, intervalo):
        mesh = build_mesh(intervalo, None, 2.0 ** -10)
        x = mesh.axes[0]
        for k in range(4):
            assert np.any(np.isclose(x, 2.0 ** (k - 10), rtol=0, atol=1e-15))
            assert np.any(np.isclose(x, 1.0 - 2.0 ** (k - 10), rtol=0, atol=1e-15))
        assert x[0] == 0.0 and x[-1] == 1.0
        assert np.all(np.diff(x) > 0)

    def test_malhas_aninhadas_ao_reduzir_h_min(self, intervalo):
        grossa = build_mesh(intervalo, None, 2.0 ** -8)
        fina = build_mesh(intervalo, None, 2.0 ** -9)
        assert np.all(np.isin(grossa.axes[0], fina.axes[0]))
        assert fina.node_count > grossa.node_count

    def test_uniforme(self, intervalo):
        mesh = build_mesh(intervalo, None, 2.0 ** -6, grade="none")
        np.testing.assert_allclose(np.diff(mesh.axes[0]), 2.0 ** -6)
        assert mesh.grading == {}

    def test_coarsen_preserva_extremos(self, intervalo):
        mesh = build_mesh(intervalo, None, 2.0 ** -6, grade="none")
        c = coarsen(mesh)
        assert c.axes[0][0] == 0.0 and c.axes[0][-1] == 1.0
        assert c.h_min == pytest.approx(2.0 ** -5)

    def test_orcamento_de_nos(self, intervalo):
        with pytest.raises(BudgetExceeded):
            build_mesh(intervalo, None, 2.0 ** -10, node_cap=10)

    def test_retangulo_com_polo_recusado(self):
        dom = geometry.rectangle((1.0, 1.0), beta=0.2, punctures=[(0.5, 0.5)])
        with pytest.raises(ParameterOutOfRange):
            build_mesh(dom, None, 2.0 ** -6)

    def test_retangulo_3d_recusado(self):
        dom = geometry.rectangle((1.0, 1.0, 1.0))
        with pytest.raises(ParameterOutOfRange):
            build_mesh(dom, None, 2.0 ** -4)

    @pytest.mark.parametrize("h_min, rho", [(0.0, 0.5), (1e-3, 1.0)])
    def test_parametros_invalidos(self, intervalo, h_min, rho):
        with pytest.raises(ParameterOutOfRange):
            build_mesh(intervalo, None, h_min, rho=rho)

    def test_descricao(self, intervalo):
        d = build_mesh(intervalo, None, 2.0 ** -8).describe()
        assert d["dim"] == 1 and d["radial"] is False
        assert d["grading"]["fronteira"]["rho"] == 0.5


class TestQuadratura:
    @pytest.mark.parametrize("grau", [0, 1, 3])
    def test_integra_polinomios_no_intervalo(self, intervalo, grau):
        quad = build_quadrature(build_mesh(intervalo, None, 2.0 ** -6))
        valor = np.sum(quad.weights * quad.points[:, 0] ** grau)
        assert valor == pytest.approx(1.0 / (grau + 1), rel=1e-12)

    def test_jacobiano_radial(self, bola):
        quad = build_quadrature(build_mesh(bola, None, 2.0 ** -8))
        assert np.sum(quad.weights) == pytest.approx(4.0 * np.pi / 3.0, rel=1e-12)

    def test_retangulo_area(self):
        dom = geometry.rectangle((1.0, 2.0))
        quad = build_quadrature(build_mesh(dom, None, 2.0 ** -5))
        assert np.sum(quad.weights) == pytest.approx(2.0, rel=1e-12)


class TestMontagem:
    def test_dirichlet_sem_estrato_singular(self, forma_zero):
        assert forma_zero.dofs == forma_zero.mesh.node_count - 2
        assert not forma_zero.free[0] and not forma_zero.free[-1]

    def test_matrizes_simetricas(self, forma_exemplo_iii):
        K = forma_exemplo_iii.K
        assert abs(K - K.T).max() <= 1e-12 * abs(K).max()
        M = forma_exemplo_iii.Mf.toarray()
        assert np.all(np.linalg.eigvalsh(M) > 0)

    def test_base_de_ground_state_sem_dirichlet_no_estrato(self, forma_exemplo_iii):
        assert forma_exemplo_iii.basis == "ground_state"
        assert forma_exemplo_iii.free.all()
        assert forma_exemplo_iii.eta_nodes[0] == 0.0

    def test_base_simples_forcada(self, intervalo):
        spec = potentials.example_III(intervalo)
        form = assemble(build_mesh(intervalo, spec, 2.0 ** -8), spec, basis="plain")
        assert form.basis == "plain"
        assert form.dofs == form.mesh.node_count - 2

    def test_ground_state_exige_coeficiente_escalar(self):
        dom = geometry.radial_ball(2.0, ambient_n=4, puncture=False)
        spec = potentials.example_II_catalog(4)
        with pytest.raises(ParameterOutOfRange):
            assemble(build_mesh(dom, None, 2.0 ** -6), spec)

    def test_massas_ponderadas(self, intervalo):
        spec = potentials.zero_spec(1)
        mesh = build_mesh(intervalo, None, 2.0 ** -6, grade="none")
        form = assemble(mesh, spec, weights={"um": lambda pts, radial: np.ones(len(pts))})
        np.testing.assert_allclose(form.masses["um"].toarray(), form.M.toarray(), rtol=1e-14, atol=1e-18)

    def test_exporta_matrizes(self, forma_zero, tmp_path):
        arquivos = forma_zero.dump(tmp_path, "level0")
        assert sorted(p.name for p in arquivos) == ["level0_A.txt", "level0_M.txt", "level0_P.txt"]
        linhas = (tmp_path / "level0_M.txt").read_text().splitlines()
        i, j, v = linhas[0].split()
        assert int(i) >= 0 and int(j) >= 0 and float(v) != 0.0
