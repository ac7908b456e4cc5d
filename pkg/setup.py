import re
from os import path
from setuptools import setup, find_packages


here = path.abspath(path.dirname(__file__))

with open(path.join(here, 'README.md'), encoding='utf-8') as fh:
    long_description = fh.read()

with open(path.join(here, 'hypoprop', '__init__.py'), 'r') as fh:
    for line in fh.readlines():
        match = re.match(r'__version__ = \'(.+)\'', line)
        if match:
            hypoprop_version = match.groups()[0]
            break
    else:
        raise ValueError('Could not get version from hypoprop/__init__.py')


setup(name='hypoprop',
      version=hypoprop_version,
      description=('Exact and FFT propagators, dispersive estimates and '
                   'uncertainty products for degenerate Schrödinger '
                   'equations with drift'),
      long_description=long_description,
      long_description_content_type='text/markdown',
      classifiers=[
          'Development Status :: 3 - Alpha',
          'Programming Language :: Python :: 3.8',
          'Programming Language :: Python :: 3.9',
          'Programming Language :: Python :: 3.10',
          'Programming Language :: Python :: 3.11',
          'Topic :: Scientific/Engineering :: Mathematics',
      ],
      packages=find_packages(),
      install_requires=['numpy', 'scipy>=1.6', 'pystow>=0.1.10', 'click'],
      extras_require={'test': ['pytest', 'pytest-cov', 'pandas'],
                      'pandas': ['pandas>=1.0'],
                      'docs': [
                          "sphinx",
                          "sphinx_autodoc_typehints",
                          "sphinx_rtd_theme",
                          "m2r2",
                      ],
      },
      keywords=['schrodinger', 'hypoelliptic', 'dispersive', 'fft'],
      include_package_data=True,
      package_data={'hypoprop': ['resources/systems/*.json']},
      entry_points={
          'console_scripts': [
              'hypoprop = hypoprop.cli:main',
          ],
      },
      )
