"""
Setup script for churnkit: prediction churn metrics, churn-reducing losses and reproducible churn experiments
"""
import os

from setuptools import find_packages, setup

import churnkit


def read(filename):
    """
    Read the contents of a file

    :param filename: the file name relative to this file
    :return: The contents of the file
    """
    with open(os.path.join(os.path.dirname(__file__), filename), encoding='utf-8') as file:
        return file.read()


setup(
    name='churnkit',
    version=churnkit.__version__,

    description='Prediction churn metrics, churn-reducing losses and reproducible churn experiments',
    long_description=read('README.rst'),
    keywords='churn reproducibility entropy regularisation reject option retrieval softmax',
    license='GPLv3',
    classifiers=[
        'Development Status :: 3 - Alpha',
        'Environment :: Console',
        'Intended Audience :: Science/Research',
        'License :: OSI Approved :: GNU General Public License v3 (GPLv3)',
        'Natural Language :: English',
        'Operating System :: POSIX',
        'Programming Language :: Python :: 3 :: Only',
        'Topic :: Scientific/Engineering :: Artificial Intelligence',
    ],

    packages=find_packages(exclude=['tests', 'tests.*']),
    package_data={
        'churnkit.cli': ['config_schema.xml'],
        'churnkit.common.logging': ['component.xml'],
    },
    include_package_data=True,
    python_requires='>=3.10',
    entry_points={
        'console_scripts': [
            'churnkit = churnkit.cli.main:run',
        ],
        'churnkit.losses': [
            'sampled-softmax = churnkit.losses.cross_example:SampledSoftmaxLoss',
            'snm             = churnkit.losses.cross_example:StochasticNegativeMiningLoss',
            'ce-softmax      = churnkit.losses.cross_example:CrossExampleSoftmaxLoss',
            'ce-mining       = churnkit.losses.cross_example:CrossExampleNegativeMiningLoss',
        ],
    },
    install_requires=[
        'cached_property',
        'numpy',
        'scipy',
        'ZConfig',
    ],
    extras_require={
        'color': ['colorlog'],
        'test': ['hypothesis'],
    },

    test_suite='tests',

    zip_safe=False,
)
