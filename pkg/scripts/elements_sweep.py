"""Mean sum-rate of the five baselines/setups against the RIS size N."""

from _common import run_preset

if __name__ == "__main__":
    run_preset("elements-sweep", __doc__)
