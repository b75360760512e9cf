"""Dense and matrix-free Pauli-level operators on (N sites) x (2 spin) states.

State index convention: dense vectors use index 2*site + spin; batched
matrix-free states have shape (batch, N, 2).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.fft as sfft

from .. import clifford
from ..grid import Constants, Grid
from ..noise import COMPONENTS
from .em import EMFieldConfig

PAULI = np.array([clifford.basis("pauli", k).to_complex() for k in (1, 2, 3)])
I2 = np.eye(2)


def levi(i, j, k):
    return clifford.levi_civita(i, j, k)


def lift(M: np.ndarray) -> np.ndarray:
    """Spatial operator -> spatial x spin."""
    return np.kron(M, I2)


def pair(component: str) -> tuple[int, int]:
    return int(component[0]), int(component[1])


# ------------------------------------------------------------------- dense


class DenseOperators:
    """Dense matrices for one grid, EM configuration and set of constants."""

    def __init__(self, grid: Grid, em: EMFieldConfig | None = None, const: Constants = Constants()):
        self.grid = grid
        self.em = em if em is not None else EMFieldConfig.off(grid)
        self.const = const
        N = grid.size
        F = grid.dft_matrix()
        hb = const.hbar
        self.p = np.zeros((3, N, N), dtype=complex)
        for i in range(grid.dim):
            self.p[i] = F.conj().T @ np.diag(hb * grid.wavenumbers[:, i]) @ F
        self.pi = self.p - (const.e / const.c) * np.array([np.diag(a) for a in self.em.A])
        self.B = self.em.B
        self.E = self.em.E

    # building blocks --------------------------------------------------
    def P(self, i):
        return lift(self.p[i - 1])

    def Pi(self, i):
        return lift(self.pi[i - 1])

    def pi2(self):
        return lift(sum(self.pi[i] @ self.pi[i] for i in range(3)))

    def p2(self):
        return lift(sum(self.p[i] @ self.p[i] for i in range(3)))

    def field(self, f):
        return lift(np.diag(np.asarray(f, dtype=complex)))

    def spin_field(self, V):
        """sum_k V_k(x) sigma_k for V of shape (3, N)."""
        return sum(np.kron(np.diag(V[k]), PAULI[k]) for k in range(3))

    def spin_component(self, f, k):
        return np.kron(np.diag(f), PAULI[k - 1])

    def B_sigma(self):
        return self.spin_field(self.B)

    def identity(self):
        return np.eye(2 * self.grid.size, dtype=complex)

    # Hamiltonians -----------------------------------------------------
    def H0(self, rest_mass: bool = False):
        c = self.const
        H = self.pi2() / (2 * c.m) + c.e * self.field(self.em.A0)
        H = H - (c.hbar * c.e / (2 * c.m * c.c)) * self.B_sigma()
        if rest_mass:
            H = H + c.m * c.c**2 * self.identity()
        return H

    def Hp_fermion(self, h: dict):
        """Gravitational correction built term by term from its anticommutator form."""
        c = self.const
        hf = lambda name: self.field(_component(h, name, self.grid.size))
        h00 = hf("00")
        H = (c.m * c.c**2 / 2) * h00
        pi2 = self.pi2()
        H = H - (pi2 @ h00 + h00 @ pi2) / (8 * c.m)
        for i in (1, 2, 3):
            h0i = hf(f"0{i}")
            H = H + (c.c / 2) * (h0i @ self.P(i) + self.P(i) @ h0i)
        for i in (1, 2, 3):
            for j in (1, 2, 3):
                hij = hf(f"{i}{j}")
                pp = self.Pi(i) @ self.Pi(j)
                H = H - (hij @ pp + pp @ hij) / (4 * c.m)
        # -(hbar e / 4mc) eps^{ikl} h_ij F^j_k sigma_l with F^j_k = eps_jkm B_m
        spin = np.zeros_like(H)
        for i in (1, 2, 3):
            for j in (1, 2, 3):
                hij = _component(h, f"{i}{j}", self.grid.size)
                if not np.any(hij):
                    continue
                for k in (1, 2, 3):
                    for l in (1, 2, 3):
                        e1 = levi(i, k, l)
                        if not e1:
                            continue
                        for m_ in (1, 2, 3):
                            e2 = levi(j, k, m_)
                            if e2:
                                spin = spin + e1 * e2 * self.spin_component(hij * self.B[m_ - 1], l)
        H = H - (c.hbar * c.e / (4 * c.m * c.c)) * spin
        H = H - (c.hbar * c.e / (4 * c.m * c.c)) * h00 @ self.B_sigma()
        return H

    def Hp_boson(self, h: dict):
        """Scalar-particle correction; no spin and no EM coupling."""
        c = self.const
        N = self.grid.size
        h00 = np.diag(_component(h, "00", N)).astype(complex)
        p2 = sum(self.p[i] @ self.p[i] for i in range(3))
        H = (c.m * c.c**2 / 2) * h00 - (h00 @ p2 + p2 @ h00) / (8 * c.m)
        for i in (1, 2, 3):
            h0i = np.diag(_component(h, f"0{i}", N))
            H = H + (c.c / 2) * (h0i @ self.p[i - 1] + self.p[i - 1] @ h0i)
            for j in (1, 2, 3):
                hij = np.diag(_component(h, f"{i}{j}", N))
                pp = self.p[i - 1] @ self.p[j - 1]
                H = H - (hij @ pp + pp @ hij) / (4 * c.m)
        return lift(H)

    def Hr(self):
        """Relativistic EM corrections of the Pauli Hamiltonian (large component)."""
        c = self.const
        E = self.E
        curlE = self.em.curl_E()
        so = np.zeros((2 * self.grid.size,) * 2, dtype=complex)
        for k in (1, 2, 3):
            # (p/2 x E)_k acts on E only: -(i hbar / 2) (curl E)_k ; (E x p)_k = eps_kij E_i p_j
            term = -0.5j * c.hbar * self.spin_component(curlE[k - 1], k)
            for i in (1, 2, 3):
                for j in (1, 2, 3):
                    e = levi(k, i, j)
                    if e:
                        term = term - e * self.spin_component(E[i - 1], k) @ self.P(j)
            so = so + term
        H = (c.hbar * c.e / (4 * c.m**2 * c.c**2)) * so
        H = H - (c.hbar**2 * c.e / (8 * c.m**2 * c.c**2)) * self.field(self.em.div_E())
        pi2 = self.pi2()
        B2 = np.sum(self.B**2, axis=0)
        H = H - (pi2 @ pi2) / (8 * c.m**3 * c.c**2)
        H = H - (c.hbar**2 * c.e**2 / (8 * c.m**3 * c.c**4)) * self.field(B2)
        Bs = self.B_sigma()
        H = H + (c.hbar * c.e / (8 * c.m**3 * c.c**3)) * (pi2 @ Bs + Bs @ pi2)
        return H

    def Xi(self):
        """Coupling operators as displayed: Xi_00 and the 3x3 array Xi_ij."""
        c = self.const
        spin = c.hbar * c.e / (2 * c.m * c.c)
        Bs = self.B_sigma()
        xi00 = self.pi2() / (4 * c.m) + (c.m * c.c**2 / 2) * self.identity() - spin * Bs
        xi = np.empty((3, 3), dtype=object)
        for i in (1, 2, 3):
            for j in (1, 2, 3):
                X = self.Pi(i) @ self.Pi(j) / (4 * c.m)
                if i == j:
                    X = X + (c.m * c.c**2 / 2) * self.identity() + spin * Bs
                # eps_kil F^k_j sigma^l = delta_ij B.sigma - B_i sigma_j
                X = X - spin * self.spin_component(self.B[i - 1], j)
                xi[i - 1, j - 1] = X
        return xi00, xi

    # couplings --------------------------------------------------------
    def couplings(self, source: str = "hamiltonian", components=COMPONENTS) -> dict:
        """K_c with the gravitational correction equal to sum_c {h_c, K_c}/2."""
        c = self.const
        out = {}
        if source == "hamiltonian":
            sp = c.hbar * c.e / (4 * c.m * c.c)
            Bs = self.B_sigma()
            for comp in components:
                a, b = pair(comp)
                if comp == "00":
                    K = (c.m * c.c**2 / 2) * self.identity() - self.pi2() / (4 * c.m) - sp * Bs
                elif a == 0:
                    K = c.c * self.P(b)
                elif a == b:
                    K = -self.Pi(a) @ self.Pi(a) / (2 * c.m)
                    K = K - sp * (Bs - self.spin_component(self.B[a - 1], a))
                else:
                    K = -(self.Pi(a) @ self.Pi(b) + self.Pi(b) @ self.Pi(a)) / (2 * c.m)
                    K = K + sp * (self.spin_component(self.B[a - 1], b) + self.spin_component(self.B[b - 1], a))
                out[comp] = K
        elif source == "paper":
            xi00, xi = self.Xi()
            for comp in components:
                a, b = pair(comp)
                if comp == "00":
                    K = xi00
                elif a == 0:
                    K = c.c * self.P(b)
                elif a == b:
                    K = xi[a - 1, a - 1]
                else:
                    K = xi[a - 1, b - 1] + xi[b - 1, a - 1]
                out[comp] = K
        else:
            raise ValueError(f"unknown coupling source {source!r}")
        return out

    def Hp_from_couplings(self, h: dict, source: str = "hamiltonian"):
        N = self.grid.size
        K = self.couplings(source)
        H = np.zeros((2 * N, 2 * N), dtype=complex)
        for comp, Kc in K.items():
            f = _component(h, comp, N)
            if np.any(f):
                D = self.field(f)
                H = H + 0.5 * (D @ Kc + Kc @ D)
        return H


def _component(h: dict, name: str, N: int) -> np.ndarray:
    key = "".join(sorted(name))
    v = h.get(key)
    if v is None:
        return np.zeros(N)
    return np.asarray(v, dtype=float).reshape(N)


# ------------------------------------------------------------- matrix-free


@dataclass
class MatrixFree:
    """Batched action of H0 and the gravitational correction on (batch, N, 2) states."""

    grid: Grid
    em: EMFieldConfig
    const: Constants = Constants()

    def __post_init__(self):
        g, c = self.grid, self.const
        self.k = g.wavenumbers.T.copy()          # (3, N)
        self.A = self.em.A
        self.has_A = [bool(np.any(self.A[i])) for i in range(3)]
        self.B = self.em.B
        self.has_B = bool(np.any(self.B))
        self.active_axes = [i for i in range(3) if i < g.dim or self.has_A[i]]
        self.spin_coeff = c.hbar * c.e / (2 * c.m * c.c)

    def _fft(self, psi):
        return self._transform(sfft.fftn, psi)

    def _ifft(self, psi):
        return self._transform(sfft.ifftn, psi)

    def _transform(self, fn, psi):
        """FFT over the site axis (second to last) of (..., N, 2) arrays."""
        g = self.grid
        lead = psi.shape[:-2]
        x = psi.reshape(lead + g.shape + (2,))
        y = fn(x, axes=tuple(range(-g.dim - 1, -1)))
        return y.reshape(psi.shape)

    def p(self, i, psi, psi_k=None):
        """p_i psi for axis i in 1..3."""
        if i > self.grid.dim:
            return np.zeros_like(psi)
        if psi_k is None:
            psi_k = self._fft(psi)
        return self._ifft(self.const.hbar * self.k[i - 1][None, :, None] * psi_k)

    def pi(self, i, psi, psi_k=None):
        out = self.p(i, psi, psi_k)
        if self.has_A[i - 1]:
            out = out - (self.const.e / self.const.c) * self.A[i - 1][None, :, None] * psi
        return out

    def pi2(self, psi):
        if not any(self.has_A):
            k2 = self.grid.k_squared
            return self._ifft(self.const.hbar**2 * k2[None, :, None] * self._fft(psi))
        psi_k = self._fft(psi)
        out = np.zeros_like(psi)
        for i in self.active_axes:
            out = out + self.pi(i + 1, self.pi(i + 1, psi, psi_k))
        return out

    def spin(self, V, psi):
        """sum_k V_k(x) sigma_k applied; V is (3, N)."""
        up, dn = psi[..., 0], psi[..., 1]
        out = np.empty_like(psi)
        out[..., 0] = V[2] * up + (V[0] - 1j * V[1]) * dn
        out[..., 1] = (V[0] + 1j * V[1]) * up - V[2] * dn
        return out

    def spin_component(self, f, k, psi):
        V = np.zeros((3, self.grid.size))
        V[k - 1] = f
        return self.spin(V, psi)

    def H0(self, psi, rest_mass: bool = False):
        c = self.const
        out = self.pi2(psi) / (2 * c.m)
        if np.any(self.em.A0):
            out = out + c.e * self.em.A0[None, :, None] * psi
        if self.has_B:
            out = out - self.spin_coeff * self.spin(self.B, psi)
        if rest_mass:
            out = out + c.m * c.c**2 * psi
        return out

    def K(self, comp, psi):
        """Coupling K_c (hamiltonian source) applied to psi."""
        c = self.const
        a, b = pair(comp)
        sp = self.spin_coeff / 2
        if comp == "00":
            out = (c.m * c.c**2 / 2) * psi - self.pi2(psi) / (4 * c.m)
            if self.has_B:
                out = out - sp * self.spin(self.B, psi)
            return out
        if a == 0:
            return c.c * self.p(b, psi)
        if a == b:
            out = -self.pi(a, self.pi(a, psi)) / (2 * c.m)
            if self.has_B:
                out = out - sp * (self.spin(self.B, psi) - self.spin_component(self.B[a - 1], a, psi))
            return out
        out = -(self.pi(a, self.pi(b, psi)) + self.pi(b, self.pi(a, psi))) / (2 * c.m)
        if self.has_B:
            out = out + sp * (self.spin_component(self.B[a - 1], b, psi) + self.spin_component(self.B[b - 1], a, psi))
        return out

    def coupling_vanishes(self, comp) -> bool:
        """True when K_c is identically zero on this grid."""
        a, b = pair(comp)
        if comp == "00":
            return False
        if a == 0:
            return b > self.grid.dim
        moving = lambda i: i <= self.grid.dim or self.has_A[i - 1]
        if a == b:
            return not moving(a) and not (self.has_B and np.any(np.delete(self.B, a - 1, axis=0)))
        return not (moving(a) and moving(b)) and not self.has_B

    def symbol(self, comp) -> np.ndarray:
        """Kinetic part of K_c as a function of k (valid when A = 0)."""
        c = self.const
        a, b = pair(comp)
        p = c.hbar * self.k
        if comp == "00":
            return c.m * c.c**2 / 2 - np.sum(p**2, axis=0) / (4 * c.m)
        if a == 0:
            return c.c * p[b - 1]
        if a == b:
            return -p[a - 1] ** 2 / (2 * c.m)
        return -p[a - 1] * p[b - 1] / c.m

    def spin_vector(self, comp):
        """Spin-field part of K_c as sum_k V_k sigma_k, or None."""
        if not self.has_B:
            return None
        a, b = pair(comp)
        sp = self.spin_coeff / 2
        if comp == "00":
            return -sp * self.B
        if a == 0:
            return None
        V = np.zeros_like(self.B)
        if a == b:
            V = -sp * self.B
            V[a - 1] = 0.0
        else:
            V[b - 1] = sp * self.B[a - 1]
            V[a - 1] = sp * self.B[b - 1]
        return V

    def Hp(self, h: dict, psi):
        """sum_c {h_c, K_c}/2 psi with h_c of shape (batch, N)."""
        if not any(self.has_A):
            return self._Hp_diagonal(h, psi)
        return self._Hp_general(h, psi)

    def _Hp_diagonal(self, h: dict, psi):
        # every K_c is diagonal in k up to a position-diagonal spin term
        comps = [c for c in h if not self.coupling_vanishes(c)]
        if not comps:
            return np.zeros_like(psi)
        f = np.stack([h[c] for c in comps])[..., None]                 # (C, batch, N, 1)
        sym = np.stack([self.symbol(c) for c in comps])[:, None, :, None]
        K_psi = self._ifft(sym * self._fft(psi)[None])
        K_fpsi = self._ifft(np.sum(sym * self._fft(f * psi[None]), axis=0))
        out = 0.5 * (np.sum(f * K_psi, axis=0) + K_fpsi)
        for i, c in enumerate(comps):
            V = self.spin_vector(c)
            if V is not None:
                out = out + f[i] * self.spin(V, psi)
        return out

    def _Hp_general(self, h: dict, psi):
        out = np.zeros_like(psi)
        for comp, f in h.items():
            if self.coupling_vanishes(comp):
                continue
            f = f[:, :, None]
            out = out + 0.5 * (f * self.K(comp, psi) + self.K(comp, f * psi))
        return out
