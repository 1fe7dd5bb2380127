#!/usr/bin/env python3
"""Generate the molecular integral fixtures under fixtures/.

Run once; the outputs are committed. Requires PySCF.

Orbitals are Loewdin-orthogonalized AOs. The dipole origin is the centre of
nuclear charge, so the nuclear dipole vanishes and the dipole file holds the
purely electronic operator -r projected on the cavity polarization.
"""
import json
import os
import sys

import numpy as np
from pyscf import ao2mo, gto
from pyscf.tools import fcidump

HERE = os.path.dirname(os.path.abspath(__file__))
OUT = os.path.join(HERE, "..", "fixtures")


def loewdin(s):
    w, v = np.linalg.eigh(s)
    return v @ np.diag(w ** -0.5) @ v.T


def build(name, atom, basis, polarization):
    mol = gto.M(atom=atom, basis=basis, unit="Angstrom", verbose=0)
    charges = mol.atom_charges()
    centre = np.einsum("i,ix->x", charges, mol.atom_coords()) / charges.sum()
    c = loewdin(mol.intor("int1e_ovlp"))
    h = c.T @ mol.intor("int1e_kin") @ c + c.T @ mol.intor("int1e_nuc") @ c
    norb = c.shape[1]
    eri = ao2mo.restore(1, ao2mo.full(mol, c, compact=False), norb)
    with mol.with_common_orig(centre):
        r = mol.intor("int1e_r")
    e = np.asarray(polarization, dtype=float)
    e /= np.linalg.norm(e)
    dip = -np.einsum("x,xij->ij", e, r)
    dip = c.T @ dip @ c

    fcidump.from_integrals(os.path.join(OUT, name + ".fcidump"), h, eri, norb,
                           mol.nelectron, nuc=mol.energy_nuc(), tol=1e-14,
                           float_format=" %.16e")
    with open(os.path.join(OUT, name + ".dipole"), "w") as f:
        f.write(f"{norb} 1\n")
        for row in dip:
            f.write(" ".join(f"{x:.16e}" for x in row) + "\n")

    ref = {
        "norb": norb,
        "nelec": mol.nelectron,
        "e_core": "%.16e" % mol.energy_nuc(),
        "h": [["%.16e" % h[i, j] for j in range(norb)] for i in range(norb)],
        "eri_0000": "%.16e" % eri[0, 0, 0, 0],
        "eri_0011": "%.16e" % eri[0, 0, 1, 1],
        "eri_0101": "%.16e" % eri[0, 1, 0, 1],
        "dipole_00": "%.16e" % dip[0, 0],
        "dipole_01": "%.16e" % dip[0, 1],
    }
    with open(os.path.join(OUT, name + ".reference.json"), "w") as f:
        json.dump(ref, f, indent=1)
        f.write("\n")


def main():
    os.makedirs(OUT, exist_ok=True)
    build("h2_sto3g", "H 0 0 0; H 0 0 0.74", "sto-3g", [0, 0, 1])
    build("h2o_sto3g",
          "O 0 0 0.1173; H 0 0.7572 -0.4692; H 0 -0.7572 -0.4692",
          "sto-3g", [0, 0, 1])
    build("lih_sto3g", "Li 0 0 0; H 0 0 1.6", "sto-3g", [0, 0, 1])
    return 0


if __name__ == "__main__":
    sys.exit(main())
