import io
import math

import pytest

from peakdemand import ingest
from peakdemand.gev import GevParams
from peakdemand.simulate import SimDivision, SimSpec, simulate

ACCEPTANCE = []


@pytest.fixture
def acceptance():
    """Record one pass/fail line per acceptance criterion."""

    def record(number, text, passed):
        line = f"criterion {number:>2}: {'PASS' if passed else 'FAIL'}  {text}"
        ACCEPTANCE.append(line)
        print(line)
        return passed

    return record


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE, key=lambda s: int(s.split(":")[0].split()[1])):
            terminalreporter.write_line(line)


HOT = GevParams(mu0=-4.4, mu1=0.2, sigma0=math.log(0.5), xi=-0.1)
FLAT = GevParams(mu0=1.0, sigma0=math.log(0.5), xi=-0.1)


def two_division_spec(n_years=5):
    return SimSpec(
        n_years=n_years,
        divisions=(
            SimDivision("Res", 0.9, 20, 2300.0, {"residential": 40.0, "industrial": 0.0}, HOT),
            SimDivision("Ind", 0.15, 30, 4000.0, {"residential": 0.0, "industrial": 0.0}, FLAT,
                        peak_mw=25.0, rest_days=("Thursday",)),
        ),
    )


@pytest.fixture(scope="session")
def sim_records():
    climate_csv, demand_csv = simulate(two_division_spec(), seed=11)
    climate = ingest.parse_climate_csv(io.StringIO(climate_csv))
    records = ingest.parse_demand_csv(io.StringIO(demand_csv))
    return climate, ingest.group_by_division(records)


@pytest.fixture(scope="session")
def res_series(sim_records):
    climate, groups = sim_records
    return ingest.aggregate_division_daily(groups["Res"], climate, ["Sunday"], "Residential")
