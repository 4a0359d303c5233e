import os

import pytest

from morphotype.lexicon import load_lexicon_file
from morphotype.type_system import load_rules_file

DATA_DIR = os.path.join(os.path.dirname(__file__), 'morphotype', 'data')


@pytest.fixture(scope='session')
def data_dir():
    return DATA_DIR


@pytest.fixture(scope='session')
def english_lexicon():
    return load_lexicon_file(os.path.join(DATA_DIR, 'english.lex'))


@pytest.fixture(scope='session')
def english_rules():
    return load_rules_file(os.path.join(DATA_DIR, 'english.rules'))
