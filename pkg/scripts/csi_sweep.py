"""Mean sum-rate of the optimised and random active/passive RIS against the CSI-error variance."""

from _common import run_preset

if __name__ == "__main__":
    run_preset("csi-sweep", __doc__)
