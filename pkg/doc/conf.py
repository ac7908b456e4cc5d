# -*- coding: utf-8 -*-
#
# Configuration file for the Sphinx documentation builder.
#
# For a full list of options see the documentation:
# http://www.sphinx-doc.org/en/stable/config

# -- Path setup --------------------------------------------------------------

import os
import sys
sys.path.insert(0, os.path.abspath('..'))
from hypoprop import __version__ as hypoprop_version

# -- Project information -----------------------------------------------------

project = 'hypoprop'
author = 'hypoprop developers'

# The short X.Y version
version = '.'.join(hypoprop_version.split('.')[:2])
# The full version, including alpha/beta/rc tags
release = hypoprop_version


# -- General configuration ---------------------------------------------------

extensions = [
    'sphinx.ext.autodoc',
    'sphinx.ext.doctest',
    'sphinx.ext.intersphinx',
    'sphinx.ext.coverage',
    'sphinx.ext.viewcode',
    'sphinx.ext.napoleon',
    # Autodoc typehints needs to come after napoleon
    'sphinx_autodoc_typehints',
    'm2r2',
]

templates_path = ['_templates']

source_suffix = ['.rst', '.md']

master_doc = 'index'

language = "en"

exclude_patterns = ['_build', 'Thumbs.db', '.DS_Store']

pygments_style = 'sphinx'


# -- Options for HTML output -------------------------------------------------

html_theme = 'sphinx_rtd_theme'

htmlhelp_basename = 'hypopropdoc'


# -- Options for manual page output ------------------------------------------

man_pages = [
    (master_doc, 'hypoprop', 'hypoprop Documentation',
     [author], 1)
]


# -- Extension configuration -------------------------------------------------

intersphinx_mapping = {
    'python': ('https://docs.python.org/', None),
    'numpy': ('https://numpy.org/doc/stable/', None),
    'scipy': ('https://docs.scipy.org/doc/scipy/', None),
}
