"""Shared parameter sets.

``FIG2`` is the standard operating point: omega_h = 10, omega_c = 0.9 (so the
work transition is 9.1), gamma0 = 0.01, beta_h = 1, beta_w = 0.09. The QRCN
variant replaces the work bath by beta_w1 = 0.09 and beta_w2 = 1 with
omega_prime = 2.
"""

import pytest

from qrefrig.model import RefrigeratorSpec

FIG2 = dict(beta_h=1.0, beta_w=0.09, omega_h=10.0, omega_c=0.9, gamma0=0.01)
QRCN_WORK = dict(beta_w1=0.09, beta_w2=1.0, omega_prime=2.0)


def qri(beta_c=2.0, **kw):
    p = {**FIG2, **kw}
    return RefrigeratorSpec.qri(p["beta_h"], beta_c, p["beta_w"], p["omega_h"], p["omega_c"], p["gamma0"])


def qrc(beta_c=2.0, **kw):
    p = {**FIG2, **kw}
    return RefrigeratorSpec.qrc(p["beta_h"], beta_c, p["beta_w"], p["omega_h"], p["omega_c"], p["gamma0"])


def qrcn(beta_c=2.0, **kw):
    p = {**FIG2, **QRCN_WORK, **kw}
    return RefrigeratorSpec.qrcn(
        p["beta_h"], beta_c, p["beta_w1"], p["beta_w2"], p["omega_h"], p["omega_c"], p["omega_prime"], p["gamma0"]
    )


BUILDERS = {"qri": qri, "qrc": qrc, "qrcn": qrcn}


@pytest.fixture(params=["qri", "qrc", "qrcn"])
def model(request):
    return request.param
