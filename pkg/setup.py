#! /usr/bin/env python
"""
Setup for manifold_l1
"""
from setuptools import setup, find_packages

reqs = [
    'numpy>=1.20',
    'scipy>=1.7',
    'matplotlib',
    'threadpoolctl',
]

setup(
    name="manifold_l1",
    description="Consistent L1 norm discretizations on triangle meshes and compressed manifold modes computed by reweighted, deflated eigenproblems",
    version='1.0.0',
    install_requires=reqs,
    extras_require={'tests': ['pytest']},
    packages=find_packages(exclude=['tests']),
    package_data={'manifold_l1': ['configurations/*.cfg']},
    python_requires='>=3.7',
    scripts=[
        "l1_modes.py",
    ],
)
