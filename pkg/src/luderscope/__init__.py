"""Optimal discrimination of quantum measurements with and without their post-measurement states."""

from .closed_form import projective_luders_success, projective_measurement_success
from .qobjects import Povm, luders_channel_choi, mp_channel_choi, validate_povm
from .tester import Ensemble, discriminate, instrument_advantage, luders_distance, measurement_distance, optimize_tester

__version__ = "0.1.0"
