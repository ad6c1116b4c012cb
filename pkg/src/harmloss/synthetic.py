"""Generator for the shipped synthetic 300 kW iPMSM drive configuration.

The values are synthetic: fitted harmonic parameters of a real machine
are not available, so the tables below follow textbook frequency trends
(skin-effect copper resistance, eddy-dominated iron and magnet
resistances, mildly falling harmonic inductances) and the scaling factors
are chosen so that a B6-2L drive over the synthetic cycle splits its
losses in roughly the proportions reported for such drives.

Run ``python -m harmloss.synthetic`` to print the JSON document.
"""

from __future__ import annotations

import json

import numpy as np

GRID_HZ = np.round(np.logspace(3.0, 6.0, 61), 6)


def harmonic_tables() -> dict:
    f = GRID_HZ
    return {
        "grid_Hz": f.tolist(),
        "ld_h_H": np.round(70e-6 * (f / 1e4) ** -0.05, 12).tolist(),
        "lq_h_H": np.round(110e-6 * (f / 1e4) ** -0.05, 12).tolist(),
        "rcu_h_Ohm": np.round(0.02 * (1.0 + np.sqrt(f / 2e3)), 9).tolist(),
        "riron_h_Ohm": np.round(150.0 * (f / 1e4) ** 0.3, 9).tolist(),
        "rmag_h_Ohm": np.round(400.0 * (f / 1e4) ** 0.2, 9).tolist(),
        "k_cu": 0.007,
        "k_iron": 0.25,
        "k_mag": 1.5,
        "f_min_Hz": 2500.0,
        "f_max_Hz": None,
    }


def config_dict() -> dict:
    return {
        "description": "Synthetic 300 kW iPMSM traction drive (not measured data)",
        "motor": {
            "pole_pairs": 4,
            "psi_pm_Vs": 0.1,
            "ld_fund_H": 90e-6,
            "lq_fund_H": 240e-6,
            "rs_Ohm": 0.012,
            "i_max_A": 560.0,
            "rated_power_W": 300e3,
            "iron_hyst_coeff_W_per_Hz_Vs2": 40.0,
            "iron_eddy_coeff_W_per_Hz2_Vs2": 0.16,
        },
        "harmonic_tables": harmonic_tables(),
        "switch": {"r_on_Ohm": 0.002, "e_sw_ref_J": 0.036, "v_ref_V": 800.0, "i_ref_A": 600.0},
        "buck": {
            "inductor_dcr_Ohm": 0.005,
            "f_sw_dc_Hz": 20000.0,
            "switch": {"r_on_Ohm": 0.004, "e_sw_ref_J": 0.01, "v_ref_V": 800.0, "i_ref_A": 300.0},
        },
        "pwm": {"f_sw_Hz": 10000.0, "samples_per_switching_period": 512,
                "fundamental_periods": 1},
        "dc_link": {"vdc_nom_V": 800.0, "step_V": 10.0, "margin": 0.05},
        "modes": [
            {"mode": "B6_2L", "max_phase_current_A": 560.0},
            {"mode": "TNPC_3L", "max_phase_current_A": 250.0},
            {"mode": "ML_5L", "max_phase_current_A": 560.0},
            {"mode": "BUCK_2L", "max_phase_current_A": 300.0, "vdc_range_V": [250.0, 800.0]},
            {"mode": "OW_H", "max_phase_current_A": 560.0},
            {"mode": "OW_Y", "max_phase_current_A": 300.0},
        ],
        "vehicle": {
            "mass_kg": 2100.0,
            "cd_a_m2": 0.62,
            "c_rr": 0.009,
            "wheel_radius_m": 0.35,
            "gear_ratio": 9.0,
            "driveline_efficiency": 0.97,
            "air_density_kg_m3": 1.204,
            "battery_loss_W": 150.0,
            "auxiliary_W": 300.0,
        },
        "lossmap": {"torque_range_Nm": [20.0, 200.0], "speed_range_radps": [100.0, 800.0]},
        "cycle": {"lattice": [9, 9]},
        "output_dir": "out",
    }


def main() -> None:
    print(json.dumps(config_dict(), indent=2))


if __name__ == "__main__":
    main()
