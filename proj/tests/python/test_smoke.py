# Copyright 2026 The cpslab Authors
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import json
from fractions import Fraction

import pytest

import cpslab


def frac(s):
    return Fraction(s)


def test_prokhorov_exact_value():
    d0 = {"space": "unit_interval", "atoms": [{"point": {"rational": "0/1"}, "weight": "1/1"}]}
    mix = {
        "space": "unit_interval",
        "atoms": [
            {"point": {"rational": "0/1"}, "weight": "1/2"},
            {"point": {"rational": "1/1"}, "weight": "1/2"},
        ],
    }
    assert frac(cpslab.prokhorov(json.dumps(d0), json.dumps(mix))) == Fraction(1, 2)
    lo, hi = cpslab.prokhorov_bracket(json.dumps(d0), json.dumps(mix), 10)
    assert frac(lo) <= Fraction(1, 2) <= frac(hi)


def test_shift_correlation_and_deviation():
    assert frac(cpslab.correlation("shift", "1/2", "0", "1", 1)) == 0
    assert frac(cpslab.correlation("shift", "1/2", "0", "0", 0)) == Fraction(1, 4)
    assert frac(cpslab.deviation_measure("shift", "1/2", "1", "2/5", 2)) == Fraction(1, 2)
    assert frac(
        cpslab.deviation_measure("shift", "1/2", "1", "2/5", 2, mode="chebyshev")
    ) == Fraction(25, 32)


def test_birkhoff_and_oscillation():
    lo, hi = cpslab.birkhoff_average(
        "shift", "1/2", "1", {"type": "pseudorandom", "seed": 42, "bits": 65536}, "65536"
    )
    assert lo == hi
    assert abs(frac(lo) - Fraction(1, 2)) <= Fraction(2, 100)
    assert frac(cpslab.oscillating_block_average(10, 4)) >= Fraction(9, 10)
    assert frac(cpslab.oscillating_block_average(10, 5)) <= Fraction(13, 100)


def test_schedule_and_conversion():
    beta, tail1, tail10 = cpslab.schedule("1/2")
    assert beta == 3
    assert frac(tail1) >= frac(tail10)
    assert frac(cpslab.convert_halving_test(1)) == Fraction(1, 16)
    assert frac(cpslab.convert_halving_test(3)) == Fraction(1, 2**16)


def test_zero_point_and_cdf():
    value, rows = cpslab.zero_measure_point("half-atom-mixture", depth=12)
    assert frac(value) != Fraction(1, 2)
    for k, (a, b, bound) in enumerate(rows):
        assert frac(bound) < Fraction(2) / 2**k
    f_half = cpslab.cdf_forward("piecewise-halves", "1/2", 10)
    assert abs(frac(f_half) - Fraction(3, 4)) <= Fraction(1, 1024)
    back = cpslab.cdf_inverse("piecewise-halves", "3/4", 8)
    assert abs(frac(back) - Fraction(1, 2)) <= Fraction(1, 256)


def test_expand_decode_and_errors():
    assert cpslab.binary_expand("1/3", 6) == "010101"
    assert frac(cpslab.binary_decode("1", 20)) == Fraction(1, 2)
    with pytest.raises(cpslab.CpsError):
        cpslab.binary_expand("1/2", 4)


def test_verify_and_orbit():
    complete, certs = cpslab.verify_point("zero-cylinders", "00000000", levels=6)
    assert complete
    assert len(certs) == 6
    orbit = cpslab.mp_orbit("1/3", steps=50, work_bits=128)
    assert len(orbit) == 50
    lo, width = orbit[0]
    assert frac(lo) <= Fraction(4, 9) <= frac(lo) + frac(width)
