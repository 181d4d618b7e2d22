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

"""Install EulerStab."""

import os
import sys
import setuptools

# To enable importing version.py directly, we add its path to sys.path.
version_path = os.path.join(os.path.dirname(__file__), 'eulerstab')
sys.path.append(version_path)
from version import __version__  # pylint: disable=g-import-not-at-top

# Get the long description from the README file.
with open('README.md') as fp:
  _LONG_DESCRIPTION = fp.read()

setuptools.setup(
    name='eulerstab',
    version=__version__,
    description=('EulerStab: linear stability atlas of elliptic Euler '
                 'collinear three-body orbits via Maslov-type index theory.'),
    long_description=_LONG_DESCRIPTION,
    long_description_content_type='text/markdown',
    author='The EulerStab Authors',
    license='Apache 2.0',
    packages=setuptools.find_packages(exclude=['examples', 'examples.*']),
    include_package_data=True,
    scripts=[],
    python_requires='>=3.7',
    install_requires=[
        'absl-py',
        'numpy',
        'scipy',
    ],
    extras_require={
        'plot': ['matplotlib'],
        'test': ['pytest'],
    },
    entry_points={
        'console_scripts': [
            'eulerstab = eulerstab.scripts.stability_main:console_entry_point'
        ],
    },
    classifiers=[
        'Development Status :: 4 - Beta',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: Apache Software License',
        'Topic :: Scientific/Engineering :: Mathematics',
        'Topic :: Scientific/Engineering :: Physics',
    ],
    keywords='celestial-mechanics three-body stability maslov-index',
)
