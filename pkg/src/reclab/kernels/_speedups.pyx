# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled limb loops for the kernels package; bit-identical to _pure.py.

Values are little-endian arrays of 64-bit limbs with at least one spare bit
in the top limb, so sums of two in-range operands never carry out.  The host
(kernels/__init__.py) guarantees nlimbs <= MAX_LIMBS and k <= MAX_ORDER.
"""

from libc.stdint cimport int64_t, uint8_t, uint64_t

cdef extern from *:
    ctypedef unsigned long long u128 "unsigned __int128"

cdef enum:
    MAX_LIMBS = 8
    MAX_ROWS = 21  # difference tables hold k+1 <= 21 rows

cdef double PHASE_SCALE = 2.0 ** -53
cdef uint64_t PHASE_MASK = ((<uint64_t> 1) << 53) - 1


cdef inline uint64_t top_mask(int bits) noexcept nogil:
    if bits % 64:
        return (((<uint64_t> 1) << (bits % 64)) - 1)
    return 0  # top limb is a pure spare when bits is a multiple of 64


cdef inline void add_mod(uint64_t* a, const uint64_t* b, int nlimbs, uint64_t mask) noexcept nogil:
    cdef u128 acc = 0
    cdef int i
    for i in range(nlimbs):
        acc = acc + a[i] + b[i]
        a[i] = <uint64_t> acc
        acc >>= 64
    a[nlimbs - 1] &= mask


cdef inline void add_plain(uint64_t* a, const uint64_t* b, int nlimbs) noexcept nogil:
    cdef u128 acc = 0
    cdef int i
    for i in range(nlimbs):
        acc = acc + a[i] + b[i]
        a[i] = <uint64_t> acc
        acc >>= 64


cdef inline void add_into(uint64_t* dst, const uint64_t* a, const uint64_t* b, int nlimbs) noexcept nogil:
    cdef u128 acc = 0
    cdef int i
    for i in range(nlimbs):
        acc = acc + a[i] + b[i]
        dst[i] = <uint64_t> acc
        acc >>= 64


cdef inline int cmp_limbs(const uint64_t* a, const uint64_t* b, int nlimbs) noexcept nogil:
    cdef int i
    for i in range(nlimbs - 1, -1, -1):
        if a[i] != b[i]:
            return 1 if a[i] > b[i] else -1
    return 0


cdef inline void mul_scalar_mod(uint64_t* a, uint64_t s, int nlimbs, uint64_t mask) noexcept nogil:
    cdef u128 acc = 0
    cdef int i
    for i in range(nlimbs):
        acc = acc + (<u128> a[i]) * s
        a[i] = <uint64_t> acc
        acc >>= 64
    a[nlimbs - 1] &= mask


cdef inline void mul_mod(uint64_t* dst, const uint64_t* a, const uint64_t* b,
                         int nlimbs, uint64_t mask) noexcept nogil:
    cdef uint64_t res[MAX_LIMBS]
    cdef u128 carry
    cdef int i, j
    for i in range(nlimbs):
        res[i] = 0
    for i in range(nlimbs):
        if a[i] == 0:
            continue
        carry = 0
        for j in range(nlimbs - i):
            carry = carry + (<u128> a[i]) * b[j] + res[i + j]
            res[i + j] = <uint64_t> carry
            carry >>= 64
    for i in range(nlimbs):
        dst[i] = res[i]
    dst[nlimbs - 1] &= mask


cdef inline double extract_phase(const uint64_t* v, int bits, int nlimbs) noexcept nogil:
    cdef int shift = bits - 53
    cdef int li = shift // 64
    cdef int sh = shift % 64
    cdef uint64_t x
    cdef uint64_t hi_part = v[li + 1] if li + 1 < nlimbs else 0
    if sh:
        x = (v[li] >> sh) | (hi_part << (64 - sh))
    else:
        x = v[li]
    return <double> (x & PHASE_MASK) * PHASE_SCALE


def classify_block(uint64_t[:, ::1] vtab, uint64_t[:, ::1] etab,
                   uint64_t[::1] t_lo, uint64_t[::1] t_hi,
                   int k, int bits, uint8_t[::1] out):
    cdef Py_ssize_t count = out.shape[0]
    cdef int nlimbs = vtab.shape[1]
    cdef uint64_t mask = top_mask(bits)
    cdef uint64_t v[MAX_ROWS * MAX_LIMBS]
    cdef uint64_t e[MAX_ROWS * MAX_LIMBS]
    cdef uint64_t lo[MAX_LIMBS]
    cdef uint64_t hi[MAX_LIMBS]
    cdef uint64_t val_err[MAX_LIMBS]
    cdef uint64_t lo_err[MAX_LIMBS]
    cdef uint64_t hi_err[MAX_LIMBS]
    cdef Py_ssize_t idx
    cdef int i, j

    for j in range(k + 1):
        for i in range(nlimbs):
            v[j * nlimbs + i] = vtab[j, i]
            e[j * nlimbs + i] = etab[j, i]
    for i in range(nlimbs):
        lo[i] = t_lo[i]
        hi[i] = t_hi[i]

    with nogil:
        for idx in range(count):
            add_into(val_err, &v[0], &e[0], nlimbs)
            add_into(lo_err, lo, &e[0], nlimbs)
            if cmp_limbs(&v[0], lo_err, nlimbs) >= 0:
                if cmp_limbs(val_err, hi, nlimbs) <= 0:
                    out[idx] = 1
                else:
                    add_into(hi_err, hi, &e[0], nlimbs)
                    out[idx] = 0 if cmp_limbs(&v[0], hi_err, nlimbs) > 0 else 2
            elif cmp_limbs(val_err, lo, nlimbs) < 0:
                out[idx] = 0
            else:
                out[idx] = 2
            for j in range(k):
                add_mod(&v[j * nlimbs], &v[(j + 1) * nlimbs], nlimbs, mask)
                add_plain(&e[j * nlimbs], &e[(j + 1) * nlimbs], nlimbs)


def phase_block(uint64_t[:, ::1] vtab, int k, int bits, double[::1] out):
    cdef Py_ssize_t count = out.shape[0]
    cdef int nlimbs = vtab.shape[1]
    cdef uint64_t mask = top_mask(bits)
    cdef uint64_t v[MAX_ROWS * MAX_LIMBS]
    cdef Py_ssize_t idx
    cdef int i, j

    for j in range(k + 1):
        for i in range(nlimbs):
            v[j * nlimbs + i] = vtab[j, i]

    with nogil:
        for idx in range(count):
            out[idx] = extract_phase(&v[0], bits, nlimbs)
            for j in range(k):
                add_mod(&v[j * nlimbs], &v[(j + 1) * nlimbs], nlimbs, mask)


def phases_at(int64_t[::1] ns, uint64_t[::1] mant, int k, int bits, double[::1] out):
    cdef Py_ssize_t count = ns.shape[0]
    cdef int nlimbs = mant.shape[0]
    cdef uint64_t mask = top_mask(bits)
    cdef uint64_t m[MAX_LIMBS]
    cdef uint64_t p[MAX_LIMBS]
    cdef uint64_t v[MAX_LIMBS]
    cdef uint64_t n_scalar
    cdef Py_ssize_t idx
    cdef int i, t

    for i in range(nlimbs):
        m[i] = mant[i]

    with nogil:
        for idx in range(count):
            n_scalar = <uint64_t> ns[idx]
            p[0] = n_scalar
            for i in range(1, nlimbs):
                p[i] = 0
            p[nlimbs - 1] &= mask
            for t in range(k - 1):
                mul_scalar_mod(p, n_scalar, nlimbs, mask)
            mul_mod(v, p, m, nlimbs, mask)
            out[idx] = extract_phase(v, bits, nlimbs)
