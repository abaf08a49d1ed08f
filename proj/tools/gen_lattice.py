#!/usr/bin/env python3
# SPDX-License-Identifier: Apache-2.0
#
# mimo-precode: real-valued SVD precoding and fast ML decoding for MIMO QAM
# Copyright (C) 2026 The mimo-precode authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
# http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.
# ------------------------------------------------------------------------
"""Generate rotated Z^n lattice generators (dims 4 and 8) from ideal trace forms
over totally real cyclotomic subfields, and write them as JSON generator files.

dim 8: K = Q(zeta_17 + zeta_17^-1), twisting element 2 - (zeta + zeta^-1).
dim 4: K = Q(zeta_15 + zeta_15^-1), twisting element found by search (norm 45).
"""
import itertools, json, math, sys
import numpy as np


def embeddings(conductor, n):
    ks = [k for k in range(1, conductor // 2 + 1) if math.gcd(k, conductor) == 1]
    assert len(ks) == n
    return [2 * math.cos(2 * math.pi * k / conductor) for k in ks]


def unit_vectors(gram, bound):
    n = gram.shape[0]
    out = []
    for v in itertools.product(range(-bound, bound + 1), repeat=n):
        v = np.array(v)
        if not v.any():
            continue
        if abs(v @ gram @ v - 1) < 1e-9:
            first = v[np.nonzero(v)[0][0]]
            if first > 0:
                out.append(v)
    return out


def orthonormal_basis(gram, bound):
    vecs = unit_vectors(gram, bound)
    basis = []
    for v in vecs:
        if all(abs(v @ gram @ b) < 1e-9 for b in basis):
            basis.append(v)
        if len(basis) == gram.shape[0]:
            return np.array(basis)
    return None


def rotation(emb_alpha, emb_basis, scale):
    # generator rows: coordinates (embeddings); columns: basis elements
    g = np.array([[math.sqrt(emb_alpha[k]) * emb_basis[j][k] for j in range(len(emb_basis))]
                  for k in range(len(emb_alpha))]) / math.sqrt(scale)
    return g


def build(conductor, n, alpha_coeffs, scale, bound, powers=None):
    theta = embeddings(conductor, n)
    if powers is None:
        powers = [[t ** i for t in theta] for i in range(n)]
    alpha = [sum(c * t ** i for i, c in enumerate(alpha_coeffs)) for t in theta]
    if min(alpha) <= 0:
        return None
    gram = np.array([[sum(alpha[k] * powers[i][k] * powers[j][k] for k in range(n))
                      for j in range(n)] for i in range(n)]) / scale
    if np.max(np.abs(gram - np.round(gram))) > 1e-8 or abs(np.linalg.det(gram) - 1) > 1e-6:
        return None
    gram = np.round(gram)
    basis = orthonormal_basis(gram, bound)
    if basis is None:
        return None
    emb_basis = [[sum(b[i] * powers[i][k] for i in range(n)) for k in range(n)] for b in basis]
    return rotation(alpha, emb_basis, scale)


def min_product_distance(g):
    n = g.shape[0]
    best = math.inf
    for v in itertools.product((-1, 0, 1), repeat=n):
        if any(v):
            best = min(best, abs(np.prod(g @ np.array(v))))
    return best


def dim8():
    # alpha = 2 - theta with theta = 2 cos(2 pi / 17); integral basis 2 cos(2 pi j k / 17)
    ks = range(1, 9)
    cosines = [[2 * math.cos(2 * math.pi * j * k / 17) for k in ks] for j in range(1, 9)]
    return build(17, 8, [2, -1], 17, 1, powers=cosines)


def dim4():
    for coeffs in itertools.product(range(-3, 4), repeat=4):
        theta = embeddings(15, 4)
        alpha = [sum(c * t ** i for i, c in enumerate(coeffs)) for t in theta]
        if min(alpha) <= 0 or abs(np.prod(alpha) - 45) > 1e-6:
            continue
        g = build(15, 4, list(coeffs), 15, 3)
        if g is not None:
            return g
    return None


def main(outdir):
    specs = {
        4: (dim4(), "rotated Z^4 lattice: ideal trace form over Q(zeta_15 + zeta_15^-1), "
                    "discriminant 1125 (Bayer-Fluckiger, Oggier, Viterbo, IEEE Trans. IT 50(4), 2004)"),
        8: (dim8(), "rotated Z^8 lattice: trace form over Q(zeta_17 + zeta_17^-1) twisted by 2 - (zeta + zeta^-1) "
                    "(Boutros, Viterbo, Rastello, Belfiore, IEEE Trans. IT 42(2), 1996)"),
    }
    for dim, (g, source) in specs.items():
        assert g is not None, dim
        assert np.max(np.abs(g.T @ g - np.eye(dim))) < 1e-12
        dp = min_product_distance(g)
        doc = {"dim": dim, "rows": [[float(x) for x in row] for row in g], "source": source,
               "min_product_distance": dp}
        with open(f"{outdir}/rotation_{dim}.json", "w") as f:
            json.dump(doc, f, indent=2)
            f.write("\n")
        print(dim, "min product distance over {-1,0,1}^n:", dp)


if __name__ == "__main__":
    main(sys.argv[1] if len(sys.argv) > 1 else ".")
