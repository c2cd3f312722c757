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

"""Exact-arithmetic computable probability spaces.

Rationals cross the boundary as "p/q" strings; use `fractions.Fraction`
to consume them without rounding.
"""

from ._cpslab import (  # noqa: F401
    CpsError,
    binary_decode,
    binary_expand,
    birkhoff_average,
    cdf_forward,
    cdf_inverse,
    convert_halving_test,
    correlation,
    deviation_measure,
    mp_orbit,
    oscillating_block_average,
    prokhorov,
    prokhorov_bracket,
    schedule,
    typicality_report,
    verify_point,
    zero_measure_point,
)
