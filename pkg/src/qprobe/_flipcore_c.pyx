# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled per-shot flip sampler; bit-identical to the numpy fallback."""

from libc.stdint cimport int64_t, uint64_t

cdef uint64_t GAMMA = 0x9E3779B97F4A7C15u
cdef uint64_t MIX1 = 0xBF58476D1CE4E5B9u
cdef uint64_t MIX2 = 0x94D049BB133111EBu
cdef double U53 = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) nogil:
    z ^= z >> 30
    z *= MIX1
    z ^= z >> 27
    z *= MIX2
    return z ^ (z >> 31)


def sample_packed(uint64_t ideal, uint64_t[::1] keys, double[::1] probs,
                  int64_t[::1] bits, Py_ssize_t shots, uint64_t[::1] out):
    cdef Py_ssize_t s, j, n_events = keys.shape[0]
    cdef uint64_t word, salt, u
    with nogil:
        for s in range(shots):
            word = ideal
            salt = (<uint64_t> s) * GAMMA
            for j in range(n_events):
                u = mix64(keys[j] ^ salt)
                if (<double> (u >> 11)) * U53 < probs[j]:
                    word ^= (<uint64_t> 1) << (<uint64_t> bits[j])
            out[s] = word
