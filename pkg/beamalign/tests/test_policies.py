import math

import numpy as np
from django.test import SimpleTestCase

from beamalign.exceptions import DomainError, InfeasibleError, ProtocolError
from beamalign.services import policies
from beamalign.services.phy import SystemParams
from beamalign.services.planner import BeamAlignmentPlanner
from beamalign.utils.angleset import AngleSet, PiecewisePrior

HALF_PI = math.pi / 2


class OraculoPerfeito(policies.FeedbackOracle):
    """Feedback sem erro para um θ conhecido"""

    def __init__(self, theta_t, theta_r):
        self.theta_t = theta_t
        self.theta_r = theta_r

    def contains(self, action):
        return action.beam_t.contains(self.theta_t) and action.beam_r.contains(self.theta_r)

    def feedback(self, action):
        return policies.ACK if self.contains(action) else policies.NACK

    def strongest(self, actions):
        return next(i for i, a in enumerate(actions) if self.contains(a))


class OraculoMudo(OraculoPerfeito):

    def feedback(self, action):
        return policies.NACK


class BaseDFSTests(SimpleTestCase):

    def setUp(self):
        self.params = SystemParams()
        self.schedule = BeamAlignmentPlanner(self.params).optimize_L()
        self.state = policies.initial_state(self.params)


class DFSTests(BaseDFSTests):

    def test_estado_inicial(self):
        self.assertEqual(self.state.backlog, 7.5e9 * 20e-3)
        self.assertEqual(self.state.phase, policies.BA)
        self.assertAlmostEqual(self.state.measure, math.pi ** 2)

    def test_dimensoes_alternadas(self):
        self.assertEqual([policies.probe_dimension(k) for k in range(4)], ['bs', 'ue', 'bs', 'ue'])
        self.assertEqual(policies.probe_dimension(0, policies.UE), policies.UE)
        with self.assertRaises(DomainError):
            policies.probe_dimension(0, 'x')

    def test_primeiro_beacon(self):
        acao = policies.dfs_decide(self.state, self.schedule, self.params)
        rho = self.schedule.rho[0]
        self.assertEqual(acao.kind, policies.ALIGN)
        self.assertEqual(acao.beta, policies.BS)
        self.assertAlmostEqual(acao.beam_t.measure(), rho * math.pi)
        self.assertEqual(acao.beam_r, self.params.ur0)
        self.assertAlmostEqual(acao.energy / (self.schedule.phi_s * rho * math.pi ** 2), 1.0, places=12)
        self.assertAlmostEqual(acao.power, acao.energy / self.params.beacon)

    def test_ack_e_nack(self):
        acao = policies.dfs_decide(self.state, self.schedule, self.params)
        rho = self.schedule.rho[0]
        ack = policies.apply_feedback(self.state, acao, policies.ACK, self.params)
        nack = policies.apply_feedback(self.state, acao, policies.NACK, self.params)
        self.assertAlmostEqual(ack.ut.measure(), rho * math.pi)
        self.assertAlmostEqual(nack.ut.measure(), (1 - rho) * math.pi)
        self.assertEqual(ack.ur, self.state.ur)
        self.assertEqual(ack.slot, 1)

    def test_caminho_so_de_acks(self):
        state = self.state
        for _ in range(self.schedule.L_star):
            acao = policies.dfs_decide(state, self.schedule, self.params)
            state = policies.apply_feedback(state, acao, policies.ACK, self.params)
        self.assertAlmostEqual(
            state.measure / (math.pi ** 2 * self.schedule.alignment_product), 1.0, places=9
        )

    def test_fase_de_dados(self):
        oraculo = OraculoPerfeito(0.3, -0.7)
        state = self.state
        for _ in range(self.schedule.L_star):
            acao = policies.dfs_decide(state, self.schedule, self.params)
            state = policies.apply_feedback(state, acao, oraculo.feedback(acao), self.params)
        self.assertTrue(state.ut.contains(0.3) and state.ur.contains(-0.7))
        dados = policies.dfs_decide(state, self.schedule, self.params)
        self.assertEqual(dados.kind, policies.COMMUNICATE)
        self.assertEqual(dados.slots, self.params.slots - self.schedule.L_star)
        self.assertEqual(dados.beam_t, state.ut)
        self.assertEqual(dados.beam_r, state.ur)
        self.assertAlmostEqual(dados.rate, self.schedule.data_rate)
        self.assertAlmostEqual(dados.align_prob, 1.0)

        final = policies.apply_feedback(state, dados, policies.NULL, self.params)
        self.assertEqual(final.phase, policies.DC)
        self.assertEqual(final.slot, self.params.slots)
        self.assertAlmostEqual(final.backlog / self.state.backlog, 0.0, places=9)

    def test_energia_esperada_dos_dados(self):
        # em Rayleigh ϑ = 1 e a energia de dados é v_L·|U_L|
        state = self.state
        for _ in range(self.schedule.L_star):
            acao = policies.dfs_decide(state, self.schedule, self.params)
            state = policies.apply_feedback(state, acao, policies.NACK, self.params)
        dados = policies.dfs_decide(state, self.schedule, self.params)
        self.assertAlmostEqual(dados.total_energy / (self.schedule.v[-1] * state.measure), 1.0, places=9)


class ProtocoloTests(BaseDFSTests):

    def test_feixe_de_alinhamento_deve_ser_estrito(self):
        with self.assertRaises(ProtocolError):
            policies.align_action(self.state, policies.BS, self.state.ut, 1.0, self.params)
        with self.assertRaises(ProtocolError):
            policies.align_action(self.state, policies.BS, AngleSet.interval(2.0, 2.5), 1.0, self.params)

    def test_feixe_de_dados_no_suporte(self):
        with self.assertRaises(ProtocolError):
            policies.data_action(
                self.state, AngleSet.full(), self.state.ur, 1e9, 1, self.params.slot, self.params
            )

    def test_feedback_invalido(self):
        acao = policies.dfs_decide(self.state, self.schedule, self.params)
        with self.assertRaises(ProtocolError):
            policies.apply_feedback(self.state, acao, policies.NULL, self.params)

    def test_ack_em_comunicacao(self):
        dados = policies.data_action(
            self.state, self.state.ut, self.state.ur, 1e9, 1, self.params.slot, self.params
        )
        with self.assertRaises(ProtocolError):
            policies.apply_feedback(self.state, dados, policies.ACK, self.params)

    def test_consumo_do_backlog(self):
        dados = policies.data_action(
            self.state, self.state.ut, self.state.ur, 1e9, 1, self.params.slot, self.params
        )
        depois = policies.apply_feedback(self.state, dados, policies.NULL, self.params)
        self.assertAlmostEqual(depois.backlog, self.state.backlog - 1e9 * self.params.slot)
        self.assertEqual(depois.slot, 1)

    def test_sem_volta_para_alinhamento(self):
        acao = policies.dfs_decide(self.state, self.schedule, self.params)
        em_dados = policies.BeliefState(
            ut=self.state.ut, ur=self.state.ur, backlog=0.0, phase=policies.DC, slot=0,
        )
        with self.assertRaises(ProtocolError):
            policies.apply_feedback(em_dados, acao, policies.ACK, self.params)
        with self.assertRaises(ProtocolError):
            policies.dfs_decide(em_dados, self.schedule, self.params)

    def test_slot_alem_do_quadro(self):
        fim = policies.BeliefState(
            ut=self.params.ut0, ur=self.params.ur0, backlog=0.0, slot=self.params.slots,
        )
        with self.assertRaises(DomainError):
            policies.dfs_decide(fim, self.schedule, self.params)


class DFSNaoUniformeTests(BaseDFSTests):

    def test_priori_uniforme_igual_a_dfs(self):
        uniforme = PiecewisePrior.uniform(self.params.ut0)
        a = policies.initial_state(self.params)
        b = policies.initial_state(self.params, uniforme, PiecewisePrior.uniform(self.params.ur0))
        oraculo = OraculoPerfeito(-1.0, 0.2)
        for _ in range(self.schedule.L_star):
            acao_a = policies.dfs_decide(a, self.schedule, self.params)
            acao_b = policies.nonuniform_dfs_decide(b, self.schedule, self.params)
            self.assertEqual(acao_a.beam_t, acao_b.beam_t)
            self.assertEqual(acao_a.beam_r, acao_b.beam_r)
            a = policies.apply_feedback(a, acao_a, oraculo.feedback(acao_a), self.params)
            b = policies.apply_feedback(b, acao_b, oraculo.feedback(acao_b), self.params)
        self.assertEqual(a.ut, b.ut)
        self.assertEqual(a.ur, b.ur)

    def test_primeiro_feixe_na_regiao_densa(self):
        prior_t = PiecewisePrior.from_weights(self.params.ut0, [1, 3])
        state = policies.initial_state(self.params, prior_t, PiecewisePrior.uniform(self.params.ur0))
        acao = policies.nonuniform_dfs_decide(state, self.schedule, self.params)
        rho = self.schedule.rho[0]
        self.assertAlmostEqual(acao.beam_t.measure(), rho * math.pi)
        self.assertTrue(acao.beam_t.issubset(AngleSet.interval(0.0, HALF_PI)))
        self.assertGreater(prior_t.mass(acao.beam_t), rho)

    def test_probabilidade_de_ack_ao_menos_rho(self):
        rng = np.random.default_rng(31)
        for _ in range(15):
            prior_t = PiecewisePrior.from_weights(self.params.ut0, rng.uniform(0.1, 6.0, size=int(rng.integers(2, 8))))
            prior_r = PiecewisePrior.from_weights(self.params.ur0, rng.uniform(0.1, 6.0, size=int(rng.integers(2, 8))))
            state = policies.initial_state(self.params, prior_t, prior_r)
            for k in range(self.schedule.L_star):
                acao = policies.nonuniform_dfs_decide(state, self.schedule, self.params)
                dim = acao.beta
                beam = acao.beam_t if dim == policies.BS else acao.beam_r
                prior = state.prior(dim)
                ack = prior.mass(beam) / prior.mass(state.support(dim))
                self.assertGreaterEqual(ack, self.schedule.rho[k] * (1 - 1e-9))
                resposta = policies.ACK if rng.random() < 0.5 else policies.NACK
                state = policies.apply_feedback(state, acao, resposta, self.params)


class BisseccaoTests(BaseDFSTests):

    def test_tempo_e_energia(self):
        phi_s = self.schedule.phi_s
        registro = policies.run_bisection(self.state, OraculoPerfeito(0.3, -0.7), 10, phi_s, self.params)
        self.assertAlmostEqual(registro.duration, 1.5e-3)
        self.assertEqual(registro.beacons, 20)
        self.assertAlmostEqual(registro.state.measure, math.pi ** 2 / 1024)
        self.assertTrue(registro.state.ut.contains(0.3) and registro.state.ur.contains(-0.7))
        # cada nível gasta φ_s|U_k| e |U_k| cai pela metade
        esperado = phi_s * math.pi ** 2 * sum(0.5 ** k for k in range(10))
        self.assertAlmostEqual(registro.energy / esperado, 1.0, places=9)

    def test_par_de_beacons(self):
        par = policies.bisection_decide(self.state, 0, 1.0, self.params)
        self.assertEqual(len(par), 2)
        self.assertAlmostEqual(par[0].beam_t.measure(), HALF_PI)
        self.assertAlmostEqual(par[0].energy, math.pi ** 2 / 2)

    def test_niveis_acima_de_l_max(self):
        with self.assertRaises(DomainError):
            policies.run_bisection(self.state, OraculoPerfeito(0.3, -0.7), 15, 1.0, self.params)


class VarreduraExaustivaTests(BaseDFSTests):

    def test_ces_tempo_e_suporte_final(self):
        registro = policies.run_exhaustive(
            self.state, OraculoPerfeito(0.3, -0.7), policies.CES, 32, 32, 1.0, self.params
        )
        self.assertAlmostEqual(registro.duration, 3.3e-3)
        self.assertEqual(registro.beacons, 64)
        self.assertAlmostEqual(registro.state.ut.measure(), math.pi / 32)
        self.assertAlmostEqual(registro.state.ur.measure(), math.pi / 32)
        self.assertTrue(registro.state.ut.contains(0.3) and registro.state.ur.contains(-0.7))
        # BS varre com a UE omnidirecional no suporte; a UE varre com a BS já fixa
        self.assertAlmostEqual(registro.energy, 32 * math.pi ** 2 / 32 + 32 * (math.pi / 32) * (math.pi / 32))

    def test_ies_para_no_primeiro_ack(self):
        theta_t = -HALF_PI + 4.5 * math.pi / 32   # quinto setor
        theta_r = -HALF_PI + 0.5 * math.pi / 32   # primeiro setor
        registro = policies.run_exhaustive(
            self.state, OraculoPerfeito(theta_t, theta_r), policies.IES, 32, 32, 1.0, self.params
        )
        self.assertEqual(registro.beacons, 6)
        self.assertAlmostEqual(registro.duration, 6 * 100e-6)
        self.assertTrue(registro.state.ut.contains(theta_t))

    def test_ies_sem_ack_mantem_suporte(self):
        registro = policies.run_exhaustive(
            self.state, OraculoMudo(0.3, -0.7), policies.IES, 32, 32, 1.0, self.params
        )
        self.assertEqual(registro.beacons, 64)
        self.assertEqual(registro.state.ut, self.state.ut)
        self.assertEqual(registro.state.ur, self.state.ur)

    def test_grade_unitaria_pula_subfase(self):
        registro = policies.run_exhaustive(
            self.state, OraculoPerfeito(0.3, -0.7), policies.CES, 32, 1, 1.0, self.params
        )
        self.assertEqual(registro.beacons, 32)
        self.assertAlmostEqual(registro.duration, 32 * 50e-6 + 50e-6)
        self.assertEqual(registro.state.ur, self.state.ur)

    def test_varredura_emite_os_beacons_de_exhaustive_decide(self):
        for modo, duracao in ((policies.CES, 50e-6), (policies.IES, 100e-6)):
            registro = policies.run_exhaustive(
                self.state, OraculoPerfeito(0.3, -0.7), modo, 8, 4, 1.0, self.params
            )
            bs = [a for a in registro.actions if a.beta == policies.BS]
            ue = [a for a in registro.actions if a.beta == policies.UE]
            esperado_bs = [
                policies.exhaustive_decide(self.state, policies.BS, s, 8, 1.0, self.params, duration=duracao)
                for s in range(len(bs))
            ]
            self.assertEqual(bs, esperado_bs)
            vencedor = next(a.beam_t for a in bs if a.beam_t.contains(0.3))
            fixo = policies.restrict(self.state, policies.BS, vencedor)
            esperado_ue = [
                policies.exhaustive_decide(fixo, policies.UE, s, 4, 1.0, self.params, duration=duracao)
                for s in range(len(ue))
            ]
            self.assertEqual(ue, esperado_ue)
            self.assertTrue(all(a.duration == duracao for a in registro.actions))

    def test_setor_do_exhaustive_decide(self):
        acao = policies.exhaustive_decide(self.state, policies.UE, 3, 8, 1.0, self.params)
        self.assertAlmostEqual(acao.beam_r.lo, -HALF_PI + 3 * math.pi / 8)
        self.assertEqual(acao.beam_t, self.state.ut)
        with self.assertRaises(DomainError):
            policies.exhaustive_decide(self.state, policies.UE, 8, 8, 1.0, self.params)

    def test_modo_invalido(self):
        with self.assertRaises(DomainError):
            policies.run_exhaustive(self.state, OraculoPerfeito(0, 0), 'x', 32, 32, 1.0, self.params)


class DadosDeReferenciaTests(BaseDFSTests):

    def test_taxa_compensa_tempo_de_alinhamento(self):
        acao = policies.baseline_data_action(self.state, 1.5e-3, self.params)
        self.assertAlmostEqual(acao.rate / (7.5e9 * 20e-3 / 18.5e-3), 1.0, places=12)
        self.assertAlmostEqual(acao.duration, 18.5e-3)
        depois = policies.apply_feedback(self.state, acao, policies.NULL, self.params)
        self.assertAlmostEqual(depois.backlog / self.state.backlog, 0.0, places=9)

    def test_alinhamento_ocupa_o_quadro(self):
        with self.assertRaises(InfeasibleError):
            policies.baseline_data_action(self.state, 20e-3, self.params)
