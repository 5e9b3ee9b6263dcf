# conftest.py: pytest setup for STMR Swarm Tool
# A part of STMR Swarm Tool
#
# Released under BSD 2-clause license.

import os
import sys

import pytest

sys.path.insert(0, os.path.join(os.path.dirname(__file__), '..', 'python'))
import libflow

SAMPLE_DIR = os.path.join(os.path.dirname(__file__), '..', 'sample')

@pytest.fixture
def flow_self_check(request):
    ''' compares every vectorized flow evaluation with the scalar loop,
        except in the long runs marked slow; used by the flow and engine
        unit tests only '''
    libflow.SELF_CHECK = request.node.get_closest_marker('slow') is None
    yield
    libflow.SELF_CHECK = False

@pytest.fixture
def sample_path():
    return lambda name: os.path.join(SAMPLE_DIR, name)

# EOF
