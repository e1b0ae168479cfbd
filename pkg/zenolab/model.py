"""
The 'model' module holds the physical parameters, qubit states and the
operator construction on the truncated qubit x Fock Hilbert space.

Basis ordering is qubit-major::

    index = qubit_index * (n_max + 1) + fock_index

with qubit_index 0 for |e> and 1 for |g>. The qubit projector
P_S x I is therefore a 2x2 block structure of (n_max + 1) sized blocks.
"""

import enum

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError

NORM_TOL = 1e-12


class Variant(enum.Enum):
    """
    Qubit-mode coupling form: Rabi (no rotating-wave approximation)
    or Jaynes-Cummings (rotating-wave approximation).
    """
    RABI = "rabi"
    JC = "jc"


@dataclass(frozen=True)
class ModelParams(object):
    """
    Physical constants with hbar = 1. *delta* is the qubit frequency,
    *omega0* the bath central frequency, *g* the coupling strength and
    *gamma* the Lorentzian half-width.
    """
    delta: float = 1.0
    omega0: float = 1.0
    g: float = 0.5
    gamma: float = 0.1
    variant: Variant = Variant.RABI

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive, got %r" % self.delta)
        if not self.omega0 > 0:
            raise ValueError("omega0 must be positive, got %r" % self.omega0)
        if self.g < 0:
            raise ValueError("g must be non-negative, got %r" % self.g)
        if self.gamma < 0:
            raise ValueError("gamma must be non-negative, got %r" % self.gamma)
        if not isinstance(self.variant, Variant):
            object.__setattr__(self, "variant", Variant(self.variant))

    @property
    def max_rate(self):
        """Largest frequency scale, used to bound the integrator step."""
        return max(self.delta, self.omega0, self.g, self.gamma)

    def replace(self, **kwargs):
        """
        Returns a copy with the fields in *kwargs* replaced.
        """
        values = self.as_dict()
        values.update(kwargs)
        return ModelParams(**values)

    def as_dict(self):
        return {"delta": self.delta, "omega0": self.omega0, "g": self.g,
                "gamma": self.gamma, "variant": self.variant}


@dataclass(frozen=True)
class QubitState(object):
    """
    Pure qubit state alpha|e> + beta|g>.
    """
    alpha: complex
    beta: complex

    def __post_init__(self):
        object.__setattr__(self, "alpha", complex(self.alpha))
        object.__setattr__(self, "beta", complex(self.beta))
        norm = abs(self.alpha) ** 2 + abs(self.beta) ** 2
        if abs(norm - 1.0) > NORM_TOL:
            raise ValueError("QubitState is not normalized: |alpha|^2 + |beta|^2 = %.15g"
                             % norm)

    @classmethod
    def excited(cls):
        return cls(1.0, 0.0)

    @classmethod
    def ground(cls):
        return cls(0.0, 1.0)

    @property
    def vector(self):
        """Amplitudes as a length 2 array in the (|e>, |g>) basis."""
        return np.array([self.alpha, self.beta], dtype=complex)

    @property
    def projector(self):
        """|psi><psi| as a 2x2 array."""
        vec = self.vector
        return np.outer(vec, vec.conj())

    def rotated(self, delta, t):
        """
        Returns the state after a free qubit evolution exp(-i (delta/2) sz t).
        """
        phase = np.exp(-0.5j * delta * t)
        return QubitState(self.alpha * phase, self.beta * phase.conjugate())


@dataclass(frozen=True)
class HilbertConfig(object):
    """
    Fock truncation: *n_max* boson levels above the vacuum,
    total dimension 2 * (n_max + 1).
    """
    n_max: int = 12

    def __post_init__(self):
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError("n_max must be an integer >= 1, got %r" % self.n_max)

    @property
    def fock_dim(self):
        return self.n_max + 1

    @property
    def dim(self):
        return 2 * (self.n_max + 1)

    def index(self, qubit_index, fock_index):
        """
        Returns the position of |qubit, fock> in the product basis.
        """
        return qubit_index * self.fock_dim + fock_index


@dataclass(frozen=True, eq=False)
class OperatorSet(object):
    """
    Qubit and boson operators lifted to the full space together with
    the Hamiltonian *h* and the non-Hermitian *h_eff* = h - i gamma a^dag a.
    """
    cfg: HilbertConfig
    sigma_x: np.ndarray
    sigma_z: np.ndarray
    sigma_plus: np.ndarray
    sigma_minus: np.ndarray
    a: np.ndarray
    a_dag: np.ndarray
    num: np.ndarray
    h: np.ndarray
    h_eff: np.ndarray
    params: ModelParams

    @property
    def gamma(self):
        return self.params.gamma

    @property
    def dim(self):
        return self.cfg.dim


@dataclass(eq=False)
class DensityMatrix(object):
    """
    Dense density matrix on the qubit x Fock space. The trace may be
    below one after selective measurements; it is never renormalized.
    """
    data: np.ndarray
    n_max: int
    dim: int = field(init=False)

    def __post_init__(self):
        self.data = np.asarray(self.data, dtype=complex)
        self.dim = 2 * (self.n_max + 1)
        if self.data.shape != (self.dim, self.dim):
            raise DimensionError("density matrix of shape %s does not match n_max=%d"
                                 % (self.data.shape, self.n_max))

    @property
    def trace(self):
        return float(np.trace(self.data).real)

    @property
    def blocks(self):
        """
        View of the data as array[q, n, q', n'].
        """
        fock = self.n_max + 1
        return self.data.reshape(2, fock, 2, fock)

    def qubit_reduced(self):
        """
        Partial trace over the boson mode, a 2x2 array.
        """
        return np.einsum("injn->ij", self.blocks)

    def mode_reduced(self):
        """
        Partial trace over the qubit, an (n_max+1) x (n_max+1) array.
        """
        return np.einsum("imin->mn", self.blocks)

    def excited_population(self):
        return float(self.qubit_reduced()[0, 0].real)

    def fock_populations(self):
        return np.real(np.diag(self.mode_reduced()))

    def hermiticity_error(self):
        return float(np.max(np.abs(self.data - self.data.conj().T)))

    def copy(self):
        return DensityMatrix(self.data.copy(), self.n_max)


def _lift(qubit_op, fock_op):
    return np.kron(qubit_op, fock_op)


def build_operators(params, cfg):
    """
    Builds all lifted operators and the Hamiltonian of the
    selected coupling *variant*:

    Rabi: (delta/2) sz + omega0 a^dag a + g sx (a + a^dag)
    JC:   (delta/2) sz + omega0 a^dag a + g (s+ a + s- a^dag)

    :param params: ModelParams
    :param cfg: HilbertConfig
    :return: OperatorSet
    """
    if cfg.n_max < 1:
        raise ValueError("n_max must be >= 1")

    fock = cfg.fock_dim
    eye_q = np.eye(2, dtype=complex)
    eye_f = np.eye(fock, dtype=complex)

    sx = np.array([[0, 1], [1, 0]], dtype=complex)
    sz = np.array([[1, 0], [0, -1]], dtype=complex)
    # |e> is index 0: sigma_plus = |e><g|
    sp = np.array([[0, 1], [0, 0]], dtype=complex)
    sm = sp.T.copy()
    a_f = np.diag(np.sqrt(np.arange(1, fock, dtype=float)), k=1).astype(complex)

    sigma_x = _lift(sx, eye_f)
    sigma_z = _lift(sz, eye_f)
    sigma_plus = _lift(sp, eye_f)
    sigma_minus = _lift(sm, eye_f)
    a = _lift(eye_q, a_f)
    a_dag = a.conj().T.copy()
    num = a_dag @ a

    h = 0.5 * params.delta * sigma_z + params.omega0 * num
    if params.variant is Variant.RABI:
        h = h + params.g * sigma_x @ (a + a_dag)
    else:
        h = h + params.g * (sigma_plus @ a + sigma_minus @ a_dag)
    # exact symmetrization against rounding in the products above
    h = 0.5 * (h + h.conj().T)

    h_eff = h - 1j * params.gamma * num

    return OperatorSet(cfg=cfg, sigma_x=sigma_x, sigma_z=sigma_z,
                       sigma_plus=sigma_plus, sigma_minus=sigma_minus,
                       a=a, a_dag=a_dag, num=num, h=h, h_eff=h_eff,
                       params=params)


def product_vector(psi, cfg):
    """
    Returns |psi_S> x |0_A> as a vector in the product basis.
    """
    vec = np.zeros(cfg.dim, dtype=complex)
    vec[cfg.index(0, 0)] = psi.alpha
    vec[cfg.index(1, 0)] = psi.beta
    return vec


def initial_state(psi, cfg):
    """
    Returns rho = |psi_S><psi_S| x |0><0|.

    :param psi: normalized QubitState
    :param cfg: HilbertConfig
    """
    if not isinstance(cfg, HilbertConfig):
        raise DimensionError("expected a HilbertConfig, got %r" % (cfg,))
    vec = product_vector(psi, cfg)
    return DensityMatrix(np.outer(vec, vec.conj()), cfg.n_max)


def qubit_expectations(psi):
    """
    Returns (<sigma_x>, <sigma_z>) in the pure state *psi*.
    """
    sx = 2.0 * (psi.alpha * psi.beta.conjugate()).real
    sz = abs(psi.alpha) ** 2 - abs(psi.beta) ** 2
    return float(sx), float(sz)
