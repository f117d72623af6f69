# utils/angleset.py
"""
Aritmética exata sobre uniões de intervalos angulares.

Um AngleSet guarda intervalos semiabertos [lo, hi) ordenados, disjuntos e
não adjacentes dentro de (-π, π]. É o espaço de estados das crenças
(suportes U_t, U_r) e dos feixes (B_t, B_r).
"""
import math
from dataclasses import dataclass, field

from ..exceptions import DomainError

TOL = 1e-12


def _normalizar(intervalos):
    """Ordena, descarta vazios e funde sobrepostos/adjacentes"""
    ret = []
    for lo, hi in sorted((float(lo), float(hi)) for lo, hi in intervalos):
        if hi <= lo:
            continue
        if lo < -math.pi - TOL or hi > math.pi + TOL:
            raise DomainError(f"Intervalo [{lo}, {hi}) fora de (-π, π]")
        if ret and lo <= ret[-1][1]:
            if hi > ret[-1][1]:
                ret[-1] = (ret[-1][0], hi)
        else:
            ret.append((lo, hi))
    return tuple(ret)


@dataclass(frozen=True)
class AngleSet:
    """União finita de intervalos [lo, hi) em radianos (valor imutável)"""

    intervals: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, 'intervals', _normalizar(self.intervals))

    @classmethod
    def from_intervals(cls, *intervalos):
        return cls(tuple(intervalos))

    @classmethod
    def interval(cls, lo, hi):
        return cls(((lo, hi),))

    @classmethod
    def full(cls):
        return cls(((-math.pi, math.pi),))

    @classmethod
    def empty(cls):
        return cls(())

    def __bool__(self):
        return bool(self.intervals)

    def __iter__(self):
        return iter(self.intervals)

    def __len__(self):
        return len(self.intervals)

    def __str__(self):
        if not self.intervals:
            return '∅'
        return ' ∪ '.join(f'[{lo:.6g}, {hi:.6g})' for lo, hi in self.intervals)

    @property
    def lo(self):
        return self.intervals[0][0]

    @property
    def hi(self):
        return self.intervals[-1][1]

    def measure(self):
        """|A| = soma dos comprimentos"""
        return math.fsum(hi - lo for lo, hi in self.intervals)

    def contains(self, theta):
        for lo, hi in self.intervals:
            if lo <= theta < hi:
                return True
            if theta < lo:
                break
        return False

    def intersect(self, other):
        """A ∩ B por varredura com dois ponteiros"""
        a, b = self.intervals, other.intervals
        i = j = 0
        ret = []
        while i < len(a) and j < len(b):
            lo = max(a[i][0], b[j][0])
            hi = min(a[i][1], b[j][1])
            if lo < hi:
                ret.append((lo, hi))
            if a[i][1] < b[j][1]:
                i += 1
            else:
                j += 1
        return AngleSet(tuple(ret))

    def subtract(self, other):
        """A \\ B"""
        ret = []
        b = other.intervals
        j = 0
        for lo, hi in self.intervals:
            cursor = lo
            while j < len(b) and b[j][1] <= cursor:
                j += 1
            k = j
            while k < len(b) and b[k][0] < hi:
                if b[k][0] > cursor:
                    ret.append((cursor, b[k][0]))
                cursor = max(cursor, b[k][1])
                if cursor >= hi:
                    break
                k += 1
            if cursor < hi:
                ret.append((cursor, hi))
        return AngleSet(tuple(ret))

    def union(self, other):
        return AngleSet(self.intervals + other.intervals)

    def issubset(self, other):
        return self.subtract(other).measure() <= TOL

    def is_strict_subset(self, other):
        """B ⊂ U com |U \\ B| > 0 (feixes de alinhamento)"""
        return self.issubset(other) and other.subtract(self).measure() > TOL

    def take_fraction(self, rho):
        """
        Subconjunto com medida rho·|A| tomado a partir do menor ângulo.

        Qualquer subconjunto com essa medida é ótimo; fixar a extremidade
        inferior deixa as execuções reprodutíveis.
        """
        if rho < 0 or rho > 1:
            raise DomainError(f"Fração fora de [0, 1]: {rho}")
        if not self.intervals:
            if rho > 0:
                raise DomainError("take_fraction sobre conjunto vazio")
            return AngleSet.empty()
        if rho == 0:
            return AngleSet.empty()
        if rho == 1:
            return self
        return self._prefixo(rho * self.measure())

    def _prefixo(self, alvo):
        ret = []
        restante = alvo
        for lo, hi in self.intervals:
            if restante <= 0:
                break
            largura = hi - lo
            if largura <= restante:
                ret.append((lo, hi))
                restante -= largura
            else:
                ret.append((lo, lo + restante))
                restante = 0.0
        return AngleSet(tuple(ret))

    def split_equal(self, partes):
        """Divide em `partes` setores consecutivos de mesma medida"""
        if partes < 1:
            raise DomainError("Número de setores deve ser >= 1")
        if not self.intervals:
            raise DomainError("split_equal sobre conjunto vazio")
        setores = []
        anterior = AngleSet.empty()
        total = self.measure()
        for n in range(1, partes + 1):
            acumulado = self if n == partes else self._prefixo(total * n / partes)
            setores.append(acumulado.subtract(anterior))
            anterior = acumulado
        return setores

    def uniform_sample(self, rng):
        """θ uniforme sobre o conjunto"""
        if not self.intervals:
            raise DomainError("Amostragem de conjunto vazio")
        u = rng.random() * self.measure()
        for lo, hi in self.intervals:
            largura = hi - lo
            if u < largura:
                return lo + u
            u -= largura
        return self.intervals[-1][1] - TOL


@dataclass(frozen=True)
class PiecewisePrior:
    """
    Densidade constante por partes sobre um AngleSet (marginal de f_0).

    pieces: tupla de (lo, hi, densidade). A massa total integra a 1.
    """

    pieces: tuple
    support: AngleSet = field(init=False)

    def __post_init__(self):
        pecas = tuple(sorted((float(lo), float(hi), float(d)) for lo, hi, d in self.pieces if hi > lo))
        if any(d <= 0 for _, _, d in pecas):
            raise DomainError("Densidades devem ser estritamente positivas no suporte")
        massa = math.fsum((hi - lo) * d for lo, hi, d in pecas)
        if abs(massa - 1.0) > 1e-12:
            raise DomainError(f"Massa total da priori deve ser 1 (obtido {massa!r})")
        object.__setattr__(self, 'pieces', pecas)
        object.__setattr__(self, 'support', AngleSet(tuple((lo, hi) for lo, hi, _ in pecas)))

    @classmethod
    def uniform(cls, support):
        medida = support.measure()
        if medida <= 0:
            raise DomainError("Priori uniforme sobre suporte vazio")
        return cls.from_weights(support, (1.0,))

    @classmethod
    def from_weights(cls, support, pesos):
        """
        Divide o suporte em len(pesos) pedaços de mesma medida e atribui
        a cada um massa proporcional ao peso.
        """
        pesos = [float(p) for p in pesos]
        if not pesos or any(p <= 0 for p in pesos):
            raise DomainError("Pesos da priori devem ser positivos")
        total = math.fsum(pesos)
        setores = support.split_equal(len(pesos))
        brutas = []
        for setor, peso in zip(setores, pesos):
            densidade = (peso / total) / setor.measure()
            brutas.extend((lo, hi, densidade) for lo, hi in setor)
        # corrige o arredondamento para a massa fechar em 1
        massa = math.fsum((hi - lo) * d for lo, hi, d in brutas)
        return cls(tuple((lo, hi, d / massa) for lo, hi, d in brutas))

    def is_uniform_on(self, conjunto):
        densidades = [d for lo, hi, d in self.pieces if AngleSet.interval(lo, hi).intersect(conjunto)]
        if not conjunto.issubset(self.support):
            return False
        return not densidades or max(densidades) <= min(densidades) * (1 + 1e-9)

    def density(self, theta):
        for lo, hi, d in self.pieces:
            if lo <= theta < hi:
                return d
        return 0.0

    def mass(self, conjunto):
        """∫_A f"""
        return math.fsum(
            d * AngleSet.interval(lo, hi).intersect(conjunto).measure()
            for lo, hi, d in self.pieces
        )

    def sample(self, rng):
        pesos = [(hi - lo) * d for lo, hi, d in self.pieces]
        u = rng.random() * math.fsum(pesos)
        for (lo, hi, _), w in zip(self.pieces, pesos):
            if u < w:
                return lo + (hi - lo) * (u / w)
            u -= w
        return self.pieces[-1][1] - TOL


def top_mass_subset(conjunto, prior, rho):
    """
    S ⊆ A com |S| = rho·|A| maximizando ∫_S f.

    Guloso por densidade decrescente (ótimo para f constante por partes);
    empates vão para o menor ângulo. Priori uniforme em A cai em
    take_fraction.
    """
    if rho <= 0:
        return AngleSet.empty()
    if rho >= 1:
        return conjunto
    if prior.is_uniform_on(conjunto):
        return conjunto.take_fraction(rho)

    pedacos = []
    for lo, hi, d in prior.pieces:
        for a, b in AngleSet.interval(lo, hi).intersect(conjunto):
            pedacos.append((-d, a, b))
    # partes de A fora do suporte da priori têm densidade zero
    for a, b in conjunto.subtract(prior.support):
        pedacos.append((0.0, a, b))
    pedacos.sort()

    restante = rho * conjunto.measure()
    escolhidos = []
    for _, a, b in pedacos:
        if restante <= 0:
            break
        largura = b - a
        if largura <= restante:
            escolhidos.append((a, b))
            restante -= largura
        else:
            escolhidos.append((a, a + restante))
            restante = 0.0
    return AngleSet(tuple(escolhidos))
