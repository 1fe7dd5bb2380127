#!/usr/bin/env python3
"""Compute reference values for the test suite and freeze them in fixtures/oracle_values.json.

Every number here comes from code that shares nothing with the C++ library: dense or
sparse matrices built from Jordan-Wigner strings and scipy matrix exponentials, and
PySCF for restricted Hartree-Fock. Run once; the output is committed.
"""
import json
import os
import sys

import numpy as np
import scipy.linalg as sla
import scipy.sparse as sp
import scipy.sparse.linalg as spla

HERE = os.path.dirname(os.path.abspath(__file__))
FIX = os.path.join(HERE, "..", "fixtures")


def boson_ops(dim):
    b = np.diag(np.sqrt(np.arange(1, dim)), 1)
    return b, b.T.copy()


def displacement(z, dim):
    b, bd = boson_ops(dim)
    return sla.expm(z * (bd - b))


def squeeze(r, dim):
    b, bd = boson_ops(dim)
    return sla.expm(0.5 * r * (b @ b - bd @ bd))


def vacuum(dim):
    v = np.zeros(dim)
    v[0] = 1.0
    return v


def dressed_displacement(eta, f, r, omega, dim):
    """X = exp[-f e^r eta (b^dag - b) / sqrt(2 omega)]."""
    return displacement(-f * np.exp(r) * eta / np.sqrt(2.0 * omega), dim)


def franck_condon_values():
    dim = 120
    e0 = vacuum(dim)
    xp = dressed_displacement(1.0, 1.0, 0.0, 1.0, dim)
    xq = dressed_displacement(0.0, 1.0, 0.0, 1.0, dim)
    g1 = e0 @ xp.T @ xq @ e0
    f, r, w = 0.7, 0.2, 1.0
    x = [dressed_displacement(e, f, r, w, dim) for e in (1.0, 0.0, 0.0, 0.0)]
    g2 = e0 @ x[0].T @ x[1].T @ x[2] @ x[3] @ e0
    return {"fc_one_body_dxi1_f1_r0_w1": g1, "fc_two_body_1000_f07_r02_w1": g2}


def overlap_values():
    dim = 160
    e0 = vacuum(dim)
    s = squeeze(0.3, dim)
    a = displacement(0.0, dim) @ s @ e0
    b = displacement(1.0, dim) @ s @ e0
    sd_a = s @ displacement(0.0, dim) @ e0
    sd_b = s @ displacement(1.0, dim) @ e0
    return {
        "overlap_ds_r03_z0_z1": a @ b,
        "overlap_sd_r03_z0_z1": sd_a @ sd_b,
        "squeeze_vacuum_amplitude_r07": (squeeze(0.7, dim) @ e0)[0],
    }


class FermionSpace:
    """Spin orbitals 2i (up) and 2i+1 (down) under a Jordan-Wigner ordering."""

    def __init__(self, n_orb):
        self.n_orb = n_orb
        self.n_so = 2 * n_orb
        z = sp.csr_matrix(np.diag([1.0, -1.0]))
        a = sp.csr_matrix(np.array([[0.0, 1.0], [0.0, 0.0]]))
        eye = sp.identity(2, format="csr")
        self.a = []
        for k in range(self.n_so):
            ops = [z] * k + [a] + [eye] * (self.n_so - k - 1)
            m = ops[0]
            for o in ops[1:]:
                m = sp.kron(m, o, format="csr")
            self.a.append(m)

    def n(self, k):
        return self.a[k].T @ self.a[k]

    def site_density(self, i):
        return self.n(2 * i) + self.n(2 * i + 1)

    def sector(self, n_up, n_dn):
        keep = []
        for s in range(2 ** self.n_so):
            bits = [(s >> (self.n_so - 1 - k)) & 1 for k in range(self.n_so)]
            if sum(bits[0::2]) == n_up and sum(bits[1::2]) == n_dn:
                keep.append(s)
        p = sp.csr_matrix((np.ones(len(keep)), (np.arange(len(keep)), keep)), shape=(len(keep), 2 ** self.n_so))
        return p


def hubbard_holstein_ed(n_sites, t, U, g, omega, n_max, periodic=True, onsite=False):
    fs = FermionSpace(n_sites)
    bonds = [(i, i + 1) for i in range(n_sites - 1)]
    if periodic and n_sites > 2:
        bonds.append((0, n_sites - 1))
    dim = 2 ** fs.n_so
    he = sp.csr_matrix((dim, dim))
    for i, j in bonds:
        for s in (0, 1):
            hop = fs.a[2 * i + s].T @ fs.a[2 * j + s]
            he = he - t * (hop + hop.T)
    eye = sp.identity(dim, format="csr")
    if onsite:
        for i in range(n_sites):
            he = he + U * (fs.n(2 * i) - 0.5 * eye) @ (fs.n(2 * i + 1) - 0.5 * eye)
    else:
        for i, j in bonds:
            he = he + U * (fs.site_density(i) - 0.5 * eye) @ (fs.site_density(j) - 0.5 * eye)
    p = fs.sector(n_sites // 2, n_sites // 2)
    he = p @ he @ p.T
    dens = [p @ fs.site_density(i) @ p.T for i in range(n_sites)]
    ne = he.shape[0]

    nb = n_max + 1
    b = sp.csr_matrix(np.diag(np.sqrt(np.arange(1, nb)), 1))
    x = b + b.T
    num = b.T @ b
    ib = sp.identity(nb, format="csr")

    def on_mode(op, a):
        m = sp.identity(1, format="csr")
        for k in range(n_sites):
            m = sp.kron(m, op if k == a else ib, format="csr")
        return m

    nbt = nb ** n_sites
    h = sp.kron(he, sp.identity(nbt), format="csr")
    for a in range(n_sites):
        h = h + sp.kron(sp.identity(ne), omega * (on_mode(num, a) + 0.5 * sp.identity(nbt)), format="csr")
        h = h + np.sqrt(omega / 2.0) * g * sp.kron(dens[a], on_mode(x, a), format="csr")
    w = spla.eigsh(h, k=1, which="SA", tol=1e-13, maxiter=20000)[0]
    return float(w[0])


def two_site_polaron_energy(t, g, omega, f, n_max):
    """<HF, 0| U^dag H U |HF, 0> for two electrons on two sites with per-site modes."""
    fs = FermionSpace(2)
    dim = 2 ** fs.n_so
    he = sp.csr_matrix((dim, dim))
    for s in (0, 1):
        hop = fs.a[s].T @ fs.a[2 + s]
        he = he - t * (hop + hop.T)
    p = fs.sector(1, 1)
    he = (p @ he @ p.T).toarray()
    dens = [(p @ fs.site_density(i) @ p.T).toarray() for i in range(2)]
    nb = n_max + 1
    b, bd = boson_ops(nb)
    ib = np.eye(nb)
    ie = np.eye(he.shape[0])
    modes = [np.kron(b, ib), np.kron(ib, b)]
    h = np.kron(he, np.eye(nb * nb))
    for a in range(2):
        ba = modes[a]
        h += omega * np.kron(ie, ba.T @ ba + 0.5 * np.eye(nb * nb))
        h += np.sqrt(omega / 2.0) * g * np.kron(dens[a], ba + ba.T)
    gen = np.zeros_like(h)
    for a in range(2):
        ba = modes[a]
        gen += -f * g / np.sqrt(2.0 * omega) * np.kron(dens[a], ba.T - ba)
    u = sla.expm(gen)
    # At U = 0 the electronic ground state is the doubly occupied bonding orbital.
    w, v = np.linalg.eigh(he)
    phi = v[:, 0]
    psi = np.kron(phi, np.kron(vacuum(nb), vacuum(nb)))
    return float(psi @ u.T @ h @ u @ psi)


def rhf_energies():
    from pyscf import gto, scf
    from pyscf.tools import fcidump

    out = {}
    for name in ("h2_sto3g", "lih_sto3g", "h2o_sto3g"):
        d = fcidump.read(os.path.join(FIX, name + ".fcidump"), verbose=False)
        norb, nelec = d["NORB"], d["NELEC"]
        mol = gto.M(verbose=0)
        mol.nelectron = nelec
        mol.incore_anyway = True
        mf = scf.RHF(mol)
        h1 = np.asarray(d["H1"]).reshape(norb, norb)
        mf.get_hcore = lambda *a, h1=h1: h1
        mf.get_ovlp = lambda *a, n=norb: np.eye(n)
        from pyscf import ao2mo
        mf._eri = ao2mo.restore(8, d["H2"], norb)
        mf.conv_tol = 1e-13
        mf.max_cycle = 500
        mf.kernel()
        out["rhf_" + name] = float(mf.e_tot + d["ECORE"])
    return out


def main():
    vals = {}
    vals.update(franck_condon_values())
    vals.update(overlap_values())
    vals["ed_hh4_periodic_nn_U1_g05_w1_nmax8"] = hubbard_holstein_ed(4, 1.0, 1.0, 0.5, 1.0, 8)
    vals["ed_hh4_periodic_nn_U1_g05_w1_nmax12"] = hubbard_holstein_ed(4, 1.0, 1.0, 0.5, 1.0, 12)
    vals["ed_hh2_open_onsite_U1_g1_w1_nmax20"] = hubbard_holstein_ed(2, 1.0, 1.0, 1.0, 1.0, 20, periodic=False,
                                                                     onsite=True)
    vals["polaron_2site_t1_g04_w1_f1"] = two_site_polaron_energy(1.0, 0.4, 1.0, 1.0, 30)
    vals.update(rhf_energies())
    vals = {k: float(v) for k, v in vals.items()}
    with open(os.path.join(FIX, "oracle_values.json"), "w") as f:
        json.dump({k: "%.15e" % v for k, v in sorted(vals.items())}, f, indent=1)
        f.write("\n")
    for k, v in sorted(vals.items()):
        print(f"{k} = {v:.15e}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
