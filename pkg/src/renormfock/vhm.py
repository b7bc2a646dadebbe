"""Scalar-source field model: assembly, exact diagonalization, dressing.

A bosonic field driven linearly by a classical source vector v,

    H(v) = dGamma(omega) + a~(v) + a(v),

is exactly solvable: completing the square with the configuration
g = -v/omega shifts it to dGamma(omega) minus the constant |v/sqrt(omega)|^2,
and the ground state is the coherent state of g.  That makes it the
canonical test bed for every renormalization ingredient in this package:

* the displaced operator W(g)* H(v) W(g) must match
  dGamma(omega) - |v/sqrt(omega)|^2 up to truncation tails,
* the dressed operator exp(-a(g)) dGamma(omega) exp(a(g)) shares the
  spectrum of dGamma(omega) exactly, at any coupling strength, because the
  conjugation is by an exactly invertible unipotent matrix.

The second route never touches a truncated raising exponential, which is
the whole point of renormalizing by singular dressings instead of by
unitary displacement.
"""

import math

import numpy as np

from .dressing import dress_lower
from .fock import (FockOperator, annihilator, creator, displacement,
                   second_quantization)
from .linalg import lowest_eigenpairs
from .modes import vhm_ground_config


class VhmModel:
    """Assembled source model on a fixed grid and cap."""

    def __init__(self, modes, basis, v, H, ground_energy_formula):
        self.modes = modes
        self.basis = basis
        self.v = v
        self.H = H
        self.ground_energy_formula = ground_energy_formula

    def __repr__(self):
        return "VhmModel(M=%d, cap=%d, e0_formula=%.6g)" % (
            self.basis.num_modes, self.basis.cap, self.ground_energy_formula)


def exact_ground_energy(v, modes):
    """Closed-form infimum -sum_i |v_i|^2 / omega_i of the source model."""
    v = np.asarray(v, dtype=complex)
    omega = modes.omega
    bad = (omega == 0) & (v != 0)
    if np.any(bad):
        raise ValueError("|v/sqrt(omega)| diverges on node(s) %s"
                         % np.flatnonzero(bad))
    ok = omega > 0
    return -float(np.sum(np.abs(v[ok]) ** 2 / omega[ok]))


def assemble_vhm(v, modes, basis):
    v = np.asarray(v, dtype=complex)
    if v.shape != (basis.num_modes,) or len(modes) != basis.num_modes:
        raise ValueError("grid, coupling vector and basis disagree on the "
                         "mode count")
    free = second_quantization(modes.omega, basis)
    H = free.mat + creator(v, basis).mat + annihilator(v, basis).mat
    op = FockOperator(basis, H, herm=True)
    return VhmModel(modes, basis, v, op, exact_ground_energy(v, modes))


def ground_state(model, k_lowest=1, tol=1e-10, seed=0):
    """Lowest eigenpairs of the assembled Hamiltonian, deterministic."""
    return lowest_eigenpairs(model.H.mat, k=k_lowest, tol=tol, seed=seed)


def check_diagonalization(model, interior_budget=None):
    """Displacement-route diagonalization defect.

    Conjugates H(v) by the truncated displacement of g = -v/omega and
    measures, on the interior sector (grades at most cap - interior_budget,
    default cap/4), the largest entry of

        W(g)* H(v) W(g) - (dGamma(omega) - |v/sqrt(omega)|^2).

    Returns (defect, unitarity_defect).  Both shrink with the exponential
    tail of |g|^2 at the cap; the defect is zero when v = 0.  The default
    interior keeps a three-quarter grade margin because the conjugation
    error at grade j scales like the raising tail of a grade-j vector,
    which is only small well below the cap.
    """
    basis = model.basis
    g = vhm_ground_config(model.v, model.modes)
    if interior_budget is None:
        interior_budget = basis.cap - basis.cap // 4
    W, udefect = displacement(g, basis)
    conj = (W.mat.conj().T @ model.H.mat @ W.mat).toarray()
    target = second_quantization(model.modes.omega, basis).mat.toarray()
    target += model.ground_energy_formula * np.eye(basis.dim)
    keep = np.flatnonzero(basis.interior_mask(interior_budget))
    delta = (conj - target)[np.ix_(keep, keep)]
    return float(np.abs(delta).max()), udefect


def renormalized_vhm(g, modes, basis):
    """The dressed free field exp(-a(g)) dGamma(omega) exp(a(g)).

    This is the matrix of the renormalized source-model Hamiltonian in the
    g-dressed representation.  It is similar to dGamma(omega) by an exact
    unipotent matrix, so its spectrum is that of dGamma(omega) at any |g|,
    and the vacuum coordinate vector is its ground state with energy zero.
    It is symmetric for the g metric, not for the euclidean one.
    """
    g = np.asarray(g, dtype=complex)
    free = second_quantization(modes.omega, basis).mat
    left = dress_lower(-g, basis).mat
    right = dress_lower(g, basis).mat
    return FockOperator(basis, left @ free @ right)
