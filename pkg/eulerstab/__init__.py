# Copyright 2021 The EulerStab Authors.
#
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

"""Import to top-level API."""
# pylint:disable=wildcard-import,g-bad-import-order

# Modules whose names collide with one of their own functions (central_config,
# monodromy) are exposed as modules only.
from eulerstab import atlas
from eulerstab import central_config
from eulerstab import index_theory
from eulerstab import monodromy
from eulerstab import spectral
from eulerstab import validation
from eulerstab.atlas import AtlasConfig
from eulerstab.atlas import build_atlas
from eulerstab.atlas import write_atlas
from eulerstab.central_config import CentralConfig
from eulerstab.central_config import MassTriple
from eulerstab.index_theory import analytic_e0_tables
from eulerstab.index_theory import classify
from eulerstab.index_theory import NormalFormTag
from eulerstab.monodromy import EssentialSystem
from eulerstab.monodromy import SymplecticMatrix
from eulerstab.spectral import IndexPair
from eulerstab.spectral import index_pair
from eulerstab.validation import CheckRegistry
import eulerstab.test_utils
from eulerstab.utils import *

# Version number.
from eulerstab.version import __version__
