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

# Lint as: python3
r"""Plots the degeneracy curves of an atlas directory.

Usage:
====================
python docs/plot_atlas.py --atlas_dir=/tmp/atlas --out=/tmp/atlas/curves.png

Not part of the package and not tested; needs matplotlib.
"""

import collections
import csv
import os

from absl import app
from absl import flags
import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # pylint: disable=g-import-not-at-top

FLAGS = flags.FLAGS

flags.DEFINE_string("atlas_dir", None, "Directory written by `eulerstab atlas`.")
flags.DEFINE_string("out", None, "Output image; defaults to curves.png there.")


def read_curves(path):
  curves = collections.OrderedDict()
  with open(path) as f:
    for row in csv.DictReader(f):
      beta, ecc = curves.setdefault(row["label"], ([], []))
      beta.append(float(row["beta"]))
      ecc.append(float(row["e"]))
  return curves


def main(argv):
  del argv
  curves = read_curves(os.path.join(FLAGS.atlas_dir, "curves.csv"))
  fig, ax = plt.subplots(figsize=(8, 6))
  for label, (beta, ecc) in curves.items():
    style = "-" if label.startswith("Gamma") else "--"
    name = label.replace("Gamma", r"$\Gamma").replace("Xi", r"$\Xi")
    ax.plot(beta, ecc, style, label=name + "$")
  ax.set_xlabel(r"$\beta$")
  ax.set_ylabel("e")
  ax.set_ylim(0, 1)
  ax.legend(loc="upper right", fontsize="small")
  out = FLAGS.out or os.path.join(FLAGS.atlas_dir, "curves.png")
  fig.savefig(out, dpi=150)
  print(out)


if __name__ == "__main__":
  flags.mark_flag_as_required("atlas_dir")
  app.run(main)
