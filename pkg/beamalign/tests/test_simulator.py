import csv
import math
import tempfile
from dataclasses import replace
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase

from beamalign.exceptions import DomainError
from beamalign.services import policies
from beamalign.services.experimentos import multicluster
from beamalign.services.phy import SystemParams, draw_channel, path_loss, watts_to_dbm
from beamalign.services.planner import error_recursions
from beamalign.services.simulator import (
    INJECTED, NONE, RECORD_COLUMNS, SIGNAL, ChannelResponder, SimulationOptions,
    analytic_vs_empirical, build_scenario, run_frame, run_monte_carlo, simulate_frames, trial_rng,
)
from beamalign.utils.angleset import AngleSet, PiecewisePrior


def dentro_de(media, referencia, desvio, n, sigmas=3.0):
    return abs(media - referencia) <= sigmas * desvio / math.sqrt(n) + 1e-12 * abs(referencia)


class CenarioTests(SimpleTestCase):

    def test_politica_desconhecida(self):
        with self.assertRaises(DomainError):
            build_scenario(SystemParams(), 'aleatoria')
        with self.assertRaises(DomainError):
            build_scenario(SystemParams(), policies.DFS, 'ruido')

    def test_probabilidades_padrao(self):
        cenario = build_scenario(SystemParams(), policies.BISECTION, INJECTED)
        self.assertEqual(cenario.p_fa, 1e-5)
        self.assertEqual(cenario.p_cmp, 1e-5)
        opcoes = SimulationOptions(p_fa=0.01, p_md=0.02)
        self.assertEqual(build_scenario(SystemParams(), policies.DFS, INJECTED, opcoes).p_cmp, 0.02)


class QuadroTests(SimpleTestCase):

    def setUp(self):
        self.params = SystemParams()
        self.cenario = build_scenario(self.params)

    def test_determinismo(self):
        a = run_frame(self.cenario, trial_rng(3, 17))
        b = run_frame(self.cenario, trial_rng(3, 17))
        self.assertEqual(a, b)

    def test_contabilidade_de_energia(self):
        for trial in range(20):
            quadro = run_frame(self.cenario, trial_rng(0, trial))
            self.assertAlmostEqual(quadro.energy_total, quadro.energy_align + quadro.energy_data)
            self.assertTrue(quadro.aligned)
            self.assertFalse(quadro.error_event)
            self.assertEqual(quadro.L_used, self.cenario.schedule.L_star)
            if quadro.data_success:
                self.assertAlmostEqual(quadro.bits_delivered / (self.params.rmin * self.params.frame), 1.0)
            else:
                self.assertEqual(quadro.bits_delivered, 0.0)

    def test_sementes_distintas(self):
        a = simulate_frames(self.cenario, 5, 1, workers=1)
        b = simulate_frames(self.cenario, 5, 2, workers=1)
        self.assertNotEqual(a, b)

    def test_trials_invalido(self):
        with self.assertRaises(DomainError):
            simulate_frames(self.cenario, 0, 1)


class MonteCarloDFSTests(SimpleTestCase):

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        cls.params = SystemParams()
        cls.cenario = build_scenario(cls.params)
        cls.trials = 2000
        cls.stats = run_monte_carlo(cls.cenario, cls.trials, seed=42, workers=1)

    def test_potencia_media_sem_erros(self):
        esperado = self.cenario.schedule.P_bar_u
        self.assertTrue(dentro_de(self.stats.mean_power, esperado, self.stats.power_std, self.trials))

    def test_vazao_sem_erros(self):
        esperado = (1 - self.params.epsilon) * self.params.rmin
        self.assertTrue(dentro_de(self.stats.mean_throughput, esperado, self.stats.throughput_std, self.trials))
        self.assertEqual(self.stats.alignment_success_rate, 1.0)
        self.assertEqual(self.stats.error_event_rate, 0.0)

    def test_outage_limitado_por_epsilon(self):
        sigma = math.sqrt(0.01 * 0.99 / self.trials)
        self.assertLessEqual(self.stats.outage_rate, 0.01 + 3 * sigma)

    def test_reprodutivel(self):
        again = run_monte_carlo(self.cenario, self.trials, seed=42, workers=1)
        self.assertEqual(again.as_dict(), self.stats.as_dict())

    def test_erro_injetado_nulo_igual_sem_erro(self):
        opcoes = SimulationOptions(p_fa=0.0, p_md=0.0)
        injetado = build_scenario(self.params, policies.DFS, INJECTED, opcoes)
        stats = run_monte_carlo(injetado, self.trials, seed=42, workers=1)
        self.assertEqual(stats.as_dict(), self.stats.as_dict())

    def test_pool_de_processos_preserva_ordem(self):
        serial = simulate_frames(self.cenario, 8, 5, workers=1)
        paralelo = simulate_frames(self.cenario, 8, 5, workers=2)
        self.assertEqual(serial, paralelo)


class ErrosInjetadosTests(SimpleTestCase):

    def test_taxa_do_flag_de_erro(self):
        params = SystemParams()
        p = 0.01
        cenario = build_scenario(params, policies.DFS, INJECTED, SimulationOptions(p_fa=p, p_md=p))
        trials = 4000
        stats = run_monte_carlo(cenario, trials, seed=9, workers=1)
        esperado = 1 - math.prod(
            (1 - rho) * (1 - p) + rho * (1 - p) for rho in cenario.schedule.rho
        )
        sigma = math.sqrt(esperado * (1 - esperado) / trials)
        self.assertAlmostEqual(stats.error_event_rate, esperado, delta=3 * sigma)

    def test_analitico_contra_empirico(self):
        relatorio = analytic_vs_empirical(SystemParams(), 0.01, 0.01, 4000, 21, workers=1)
        self.assertEqual([linha.quantity for linha in relatorio.rows], ['throughput_bps', 'power_W'])
        self.assertFalse(relatorio.flagged, relatorio.rows)
        analise = error_recursions(build_scenario(SystemParams()).schedule, 0.01, 0.01)
        self.assertAlmostEqual(relatorio.rows[0].analytic, analise.T_bar_err)


class DetectorDeSinalTests(SimpleTestCase):
    """A energia-piso φ_s|B| entrega p_fa = p_md = p_e no detector"""

    def test_calibracao(self):
        params = SystemParams()
        pe = 0.05
        cenario = build_scenario(params, policies.DFS, SIGNAL, pe=pe)
        phi_s = cenario.detection.phi_s
        uniforme = PiecewisePrior.uniform(params.ut0)
        rng = np.random.default_rng(13)
        fora = AngleSet.interval(2.0, 3.0)
        acerto = policies.Action(
            kind=policies.ALIGN, beta=policies.BS, beam_t=params.ut0, beam_r=params.ur0,
            energy=phi_s * params.u0_measure,
        )
        falso = policies.Action(
            kind=policies.ALIGN, beta=policies.BS, beam_t=fora, beam_r=params.ur0,
            energy=phi_s * fora.measure() * params.ur0.measure(),
        )
        n = 20000
        perdidos = alarmes = 0
        for _ in range(n):
            responder = ChannelResponder(draw_channel(params, uniforme, uniforme, rng), cenario, rng)
            perdidos += responder.feedback(acerto) == policies.NACK
            alarmes += responder.feedback(falso) == policies.ACK
        sigma = math.sqrt(pe * (1 - pe) / n)
        self.assertAlmostEqual(perdidos / n, pe, delta=3 * sigma)
        self.assertAlmostEqual(alarmes / n, pe, delta=3 * sigma)


class ComparacaoDePoliticasTests(SimpleTestCase):

    def test_lacunas_em_db(self):
        # L_max = 10, 10 níveis de bissecção, 32 setores por dimensão, SE 15
        params = SystemParams(l_max=10, rmin=15 * 500e6)
        opcoes = SimulationOptions(bisection_levels=10)
        dbm = {}
        for politica in (policies.DFS, policies.BISECTION, policies.IES, policies.CES):
            cenario = build_scenario(params, politica, NONE, opcoes)
            dbm[politica] = watts_to_dbm(run_monte_carlo(cenario, 400, seed=3, workers=1).mean_power)
        lacuna = {p: dbm[p] - dbm[policies.DFS] for p in dbm}
        self.assertTrue(0.8 <= lacuna[policies.BISECTION] <= 1.6, lacuna)
        self.assertTrue(5.0 <= lacuna[policies.CES] <= 7.0, lacuna)
        self.assertTrue(7.0 <= lacuna[policies.IES] <= 9.7, lacuna)
        self.assertGreater(lacuna[policies.IES], lacuna[policies.CES])


class PrioriNaoUniformeTests(SimpleTestCase):
    """A priori uniforme é o pior caso da DFS com priori"""

    trials = 300

    def _potencia(self, params, prior_t, prior_r, seed):
        opcoes = SimulationOptions(prior_t=prior_t, prior_r=prior_r)
        cenario = build_scenario(params, policies.DFS_NONUNIFORM, NONE, opcoes)
        return cenario, run_monte_carlo(cenario, self.trials, seed=seed, workers=1)

    def test_prioris_aleatorias_nao_superam_uniforme(self):
        params = SystemParams()
        rng = np.random.default_rng(23)
        for indice in range(10):
            prior_t = PiecewisePrior.from_weights(params.ut0, rng.uniform(0.2, 5.0, size=int(rng.integers(2, 7))))
            prior_r = PiecewisePrior.from_weights(params.ur0, rng.uniform(0.2, 5.0, size=int(rng.integers(2, 7))))
            cenario, stats = self._potencia(params, prior_t, prior_r, seed=indice)
            limite = cenario.schedule.P_bar_u + 3 * stats.power_std / math.sqrt(self.trials)
            self.assertLessEqual(stats.mean_power, limite, indice)
            self.assertEqual(stats.alignment_success_rate, 1.0)

    def test_priori_uniforme_iguala_plano(self):
        params = SystemParams()
        cenario, stats = self._potencia(
            params, PiecewisePrior.uniform(params.ut0), PiecewisePrior.uniform(params.ur0), seed=2
        )
        esperado = cenario.schedule.P_bar_u
        self.assertTrue(dentro_de(stats.mean_power, esperado, stats.power_std, self.trials))

    def test_priori_com_pesos_fixos(self):
        params = SystemParams()
        prior_t = PiecewisePrior.from_weights(params.ut0, [3, 1])
        prior_r = PiecewisePrior.from_weights(params.ur0, [1, 2])
        cenario, stats = self._potencia(params, prior_t, prior_r, seed=8)
        limite = cenario.schedule.P_bar_u + 3 * stats.power_std / math.sqrt(self.trials)
        self.assertLessEqual(stats.mean_power, limite)


class FaseDeDadosTests(SimpleTestCase):
    """Sucesso dos dados decidido pela SNR recebida no canal sorteado"""

    def _visada_direta(self, **alteracoes):
        base = SystemParams(**alteracoes)
        return replace(base, gamma_hat=1.0 / path_loss(base), sigma_e2_override=0.0)

    def test_um_cluster_sucesso_sse_alinhado(self):
        cenario = build_scenario(self._visada_direta())
        quadros = simulate_frames(cenario, 200, seed=6, workers=1)
        self.assertTrue(all(q.data_success == q.aligned for q in quadros))
        self.assertGreater(sum(q.aligned for q in quadros), 180)

    def test_cluster_fraco_sozinho_nao_sustenta_a_taxa(self):
        params = self._visada_direta(clusters=2, weak_cluster_fraction=0.1)
        cenario = build_scenario(params, policies.DFS, SIGNAL)
        quadros = simulate_frames(cenario, 200, seed=6, workers=1)
        self.assertTrue(all(q.aligned for q in quadros if q.data_success))

class RegistrosTests(SimpleTestCase):

    def test_csv_por_ensaio(self):
        cenario = build_scenario(SystemParams())
        with tempfile.TemporaryDirectory() as pasta:
            caminho = Path(pasta) / 'sub' / 'ensaios.csv'
            run_monte_carlo(cenario, 5, seed=1, workers=1, records=caminho)
            with caminho.open() as arquivo:
                linhas = list(csv.reader(arquivo))
        self.assertEqual(tuple(linhas[0]), RECORD_COLUMNS)
        self.assertEqual(len(linhas), 6)
        self.assertEqual([l[0] for l in linhas[1:]], ['0', '1', '2', '3', '4'])




class MultiClusterTests(SimpleTestCase):
    """K = 2 em visada direta, vazão entregue fixa em 0.99·10·W"""

    @classmethod
    def setUpClass(cls):
        super().setUpClass()
        base = SystemParams(l_max=10)
        cls.params = replace(base, gamma_hat=1.0 / path_loss(base), sigma_e2_override=0.0)
        cls.opcoes = SimulationOptions(bisection_levels=10)
        cls.trials = 2000
        cls.linhas = multicluster(
            cls.params, cls.opcoes, [0.0, 0.05, 0.1], 10,
            [policies.DFS, policies.BISECTION], cls.trials, seed=4, workers=1,
        )
        cls.dbm = {(l['weak_fraction'], l['policy']): watts_to_dbm(l['stats'].mean_power) for l in cls.linhas}

    def degradacao(self, politica, fracao):
        return self.dbm[(fracao, politica)] - self.dbm[(0.0, politica)]

    def test_vazao_casada(self):
        alvo = 0.99 * 10 * self.params.bandwidth
        for linha in self.linhas:
            self.assertAlmostEqual(linha['stats'].mean_throughput / alvo, 1.0, delta=2e-6)
            self.assertGreater(linha['rmin_bps'], alvo)

    def test_degradacao_monotona(self):
        for politica in (policies.DFS, policies.BISECTION):
            potencias = [self.dbm[(f, politica)] for f in (0.0, 0.05, 0.1)]
            self.assertEqual(potencias, sorted(potencias), politica)

    def test_dfs_abaixo_da_bisseccao(self):
        for fracao in (0.0, 0.05):
            self.assertLess(self.dbm[(fracao, policies.DFS)], self.dbm[(fracao, policies.BISECTION)], fracao)

    def test_energia_perdida_no_cluster_fraco(self):
        # dados projetados para a fração dominante: pelo menos 10 log10(1/(1-ϱ))
        for politica in (policies.DFS, policies.BISECTION):
            for fracao in (0.05, 0.1):
                piso = 10 * math.log10(1 / (1 - fracao))
                self.assertGreater(self.degradacao(politica, fracao), piso - 0.02, (politica, fracao))
        # a DFS ainda segue o cluster fraco quando ele é detectado sozinho
        self.assertGreater(self.degradacao(policies.DFS, 0.1), self.degradacao(policies.BISECTION, 0.1))
        self.assertLess(self.degradacao(policies.DFS, 0.1), 3.0)

    def test_sem_cluster_fraco_igual_a_um_cluster(self):
        params = replace(self.params, rmin=10 * self.params.bandwidth)
        dois = build_scenario(replace(params, clusters=2), policies.DFS, SIGNAL, self.opcoes)
        um = build_scenario(params, policies.DFS, SIGNAL, self.opcoes)
        a = run_monte_carlo(dois, 500, seed=5, workers=1)
        b = run_monte_carlo(um, 500, seed=5, workers=1)
        erro = math.sqrt(a.power_std ** 2 + b.power_std ** 2) / math.sqrt(500)
        self.assertLessEqual(abs(a.mean_power - b.mean_power), 4 * erro + 1e-12 * b.mean_power)
