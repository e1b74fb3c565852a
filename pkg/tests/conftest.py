import numpy as np
import pytest

from affine_libor.model import TenorStructure, fit_term_structure
from affine_libor.processes import CirParams, GammaOuParams, two_factor_cir

# Euro zone zero-coupon bond prices, 2002-02-19 (semi-annual tenor).
TABLE1_MATURITIES = 0.5 * np.arange(1, 11)
TABLE1_DISCOUNTS = np.array([
    0.9833630, 0.9647388, 0.9435826, 0.9228903, 0.9006922,
    0.8790279, 0.8568412, 0.8352144, 0.8133497, 0.7920573,
])

CIR_PARAMS = dict(lam=0.001, theta=0.50, eta=0.59, x0=1.25)
GOU_PARAMS = dict(lam=0.01, alpha=2.0, beta=1.0, x0=1.25)
# Two-factor parameterisation used throughout the cross-checks; chosen
# with lam*theta/eta^2 well above one so the mixture-CDF truncation bound
# certifies its tolerance.
CIR2F_PARAMS = (0.5, 0.6, 0.25, 1.2, 0.4, 0.3, 1.0, 1.0)


@pytest.fixture(scope="session")
def tenor():
    return TenorStructure.from_curve(TABLE1_MATURITIES, TABLE1_DISCOUNTS)


@pytest.fixture(scope="session")
def cir_process():
    return CirParams(**CIR_PARAMS)


@pytest.fixture(scope="session")
def gou_process():
    return GammaOuParams(**GOU_PARAMS)


@pytest.fixture(scope="session")
def cir_model(tenor, cir_process):
    return fit_term_structure(tenor, cir_process, x0=np.array([1.25]))


@pytest.fixture(scope="session")
def gou_model(tenor, gou_process):
    return fit_term_structure(tenor, gou_process, x0=np.array([1.25]))


@pytest.fixture(scope="session")
def cir2f_model(tenor):
    return fit_term_structure(tenor, two_factor_cir(*CIR2F_PARAMS))


@pytest.fixture(scope="session")
def flat_tenor():
    disc = np.full(6, 0.97)
    return TenorStructure.from_curve(0.5 * np.arange(1, 7), disc)


@pytest.fixture(scope="session")
def flat_model(flat_tenor, cir_process):
    return fit_term_structure(flat_tenor, cir_process, x0=np.array([1.25]))
