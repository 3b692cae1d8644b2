# cython: language_level=3, boundscheck=False, wraparound=False
# distutils: language = c++
"""Compiled mining kernels. Same contract as _kernels_py; see that module."""

from cython.operator cimport dereference as deref
from libc.stdint cimport int32_t, int64_t
from libcpp.unordered_map cimport unordered_map
from libcpp.vector cimport vector

import numpy as np


def scan_unigrams(const int32_t[::1] tokens, const int64_t[::1] offsets, Py_ssize_t vocab_size):
    counts_arr = np.zeros(vocab_size, dtype=np.int64)
    stamp_arr = np.full(vocab_size, -1, dtype=np.int64)
    cdef int64_t[::1] counts = counts_arr
    cdef int64_t[::1] stamp = stamp_arr
    cdef Py_ssize_t s, p
    cdef int32_t t
    for s in range(offsets.shape[0] - 1):
        for p in range(offsets[s], offsets[s + 1]):
            t = tokens[p]
            if stamp[t] != s:
                stamp[t] = s
                counts[t] += 1
    return counts_arr


def scan_level(const int32_t[::1] tokens, const int64_t[::1] offsets,
               const int32_t[::1] prev_pos, Py_ssize_t width):
    cdef unordered_map[int64_t, int32_t] table
    cdef vector[int64_t] keys
    cdef vector[int64_t] counts
    cdef vector[int64_t] stamp
    new_pos_arr = np.full(tokens.shape[0], -1, dtype=np.int32)
    cdef int32_t[::1] new_pos = new_pos_arr
    cdef Py_ssize_t s, p, last
    cdef int64_t key
    cdef int32_t a, idx
    cdef unordered_map[int64_t, int32_t].iterator it
    for s in range(offsets.shape[0] - 1):
        last = offsets[s + 1] - width
        for p in range(offsets[s], last + 1):
            a = prev_pos[p]
            if a < 0 or prev_pos[p + 1] < 0:
                continue
            key = ((<int64_t>a) << 32) | (<int64_t>tokens[p + width - 1])
            it = table.find(key)
            if it == table.end():
                idx = <int32_t>keys.size()
                table[key] = idx
                keys.push_back(key)
                counts.push_back(0)
                stamp.push_back(-1)
            else:
                idx = deref(it).second
            new_pos[p] = idx
            if stamp[idx] != s:
                stamp[idx] = s
                counts[idx] += 1

    cdef Py_ssize_t n = keys.size()
    keys_arr = np.empty(n, dtype=np.int64)
    counts_arr = np.empty(n, dtype=np.int64)
    cdef int64_t[::1] kv = keys_arr
    cdef int64_t[::1] cv = counts_arr
    for p in range(n):
        kv[p] = keys[p]
        cv[p] = counts[p]
    return keys_arr, counts_arr, new_pos_arr
