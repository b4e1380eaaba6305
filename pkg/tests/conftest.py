"""Shared fixtures: one service graph per session, the default seed, and small presentations."""

import numpy as np
import pytest

from gosphere.config.settings import CONFIG
from gosphere.services.curvature.service import CurvatureService
from gosphere.services.gocheck.service import GOCheckService
from gosphere.services.liealg.service import LieAlgService
from gosphere.services.navigation.service import NavigationService
from gosphere.services.norms.service import NormService


@pytest.fixture(scope="session")
def seed() -> int:
    return CONFIG["SEED"]


@pytest.fixture
def rng(seed) -> np.random.Generator:
    return np.random.default_rng(seed)


@pytest.fixture(scope="session")
def norm_service() -> NormService:
    return NormService()


@pytest.fixture(scope="session")
def liealg_service(norm_service) -> LieAlgService:
    return LieAlgService(norm_service)


@pytest.fixture(scope="session")
def gocheck_service(norm_service, liealg_service) -> GOCheckService:
    return GOCheckService(norm_service, liealg_service)


@pytest.fixture(scope="session")
def navigation_service() -> NavigationService:
    return NavigationService()


@pytest.fixture(scope="session")
def curvature_service(navigation_service, norm_service) -> CurvatureService:
    return CurvatureService(navigation_service, norm_service)


@pytest.fixture(scope="session")
def sp_u1(liealg_service):
    return liealg_service.build_presentation("sp_u1", 2)


@pytest.fixture(scope="session")
def sp(liealg_service):
    return liealg_service.build_presentation("sp", 2)
