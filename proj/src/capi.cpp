#include "spdcsim.h"

#include <cctype>
#include <exception>
#include <filesystem>
#include <string>

#include "config.hpp"
#include "errors.hpp"
#include "experiments.hpp"
#include "phasematching.hpp"
#include "state.hpp"

using namespace spdcsim;

namespace {

thread_local std::string t_last_error;

spdc_status fail(spdc_status code, const char* what) {
    t_last_error = what ? what : "unknown error";
    return code;
}

template <typename F>
spdc_status guarded(F&& f) {
    try {
        f();
        return SPDC_OK;
    } catch (const std::invalid_argument& e) {
        return fail(SPDC_ERR_INVALID_ARGUMENT, e.what());
    } catch (const std::out_of_range& e) {
        return fail(SPDC_ERR_RANGE, e.what());
    } catch (const ConfigError& e) {
        return fail(SPDC_ERR_CONFIG, e.what());
    } catch (const NoPhaseMatchError& e) {
        return fail(SPDC_ERR_NO_PHASE_MATCH, e.what());
    } catch (const NotConvergedError& e) {
        return fail(SPDC_ERR_NOT_CONVERGED, e.what());
    } catch (const UndefinedResultError& e) {
        return fail(SPDC_ERR_UNDEFINED_RESULT, e.what());
    } catch (const LockFailureError& e) {
        return fail(SPDC_ERR_LOCK_FAILURE, e.what());
    } catch (const std::filesystem::filesystem_error& e) {
        return fail(SPDC_ERR_IO, e.what());
    } catch (const std::exception& e) {
        return fail(SPDC_ERR_INTERNAL, e.what());
    } catch (...) {
        return fail(SPDC_ERR_INTERNAL, "unknown exception");
    }
}

spdc_status require(bool ok, const char* what) {
    return ok ? SPDC_OK : fail(SPDC_ERR_INVALID_ARGUMENT, what);
}

} // namespace

struct spdc_state {
    BiphotonState state;
};

struct spdc_crystal {
    CrystalSpec spec;
    SellmeierSet sellmeier;
};

struct spdc_experiment {
    ExperimentEngine engine;
};

extern "C" {

const char* spdc_status_name(spdc_status status) {
    switch (status) {
        case SPDC_OK: return "ok";
        case SPDC_ERR_INVALID_ARGUMENT: return "invalid-argument";
        case SPDC_ERR_RANGE: return "range";
        case SPDC_ERR_CONFIG: return "config";
        case SPDC_ERR_NO_PHASE_MATCH: return "no-phase-match";
        case SPDC_ERR_NOT_CONVERGED: return "not-converged";
        case SPDC_ERR_UNDEFINED_RESULT: return "undefined-result";
        case SPDC_ERR_LOCK_FAILURE: return "lock-failure";
        case SPDC_ERR_IO: return "io";
        case SPDC_ERR_INTERNAL: return "internal";
    }
    return "unknown";
}

const char* spdc_last_error(void) {
    return t_last_error.c_str();
}

void spdc_version(int* major, int* minor, int* patch) {
    if (major) *major = 1;
    if (minor) *minor = 0;
    if (patch) *patch = 0;
}

/* ---------------------------- states ------------------------------- */

spdc_status spdc_state_create_phase(double phi_rad, spdc_state** out) {
    if (spdc_status s = require(out != nullptr, "out pointer is null")) return s;
    return guarded([&] {
        *out = new spdc_state{BiphotonState::pure(build_output_state(phi_rad))};
    });
}

spdc_status spdc_state_apply_dephasing(spdc_state* state, double visibility) {
    if (spdc_status s = require(state != nullptr, "state handle is null")) return s;
    return guarded([&] {
        if (!(visibility >= 0.0 && visibility <= 1.0)) {
            throw std::invalid_argument("visibility must lie in [0,1]");
        }
        // Dephasing a possibly-mixed state: scale the HV/VH coherence only.
        Mat4c rho = state->state.rho();
        rho(1, 2) *= visibility;
        rho(2, 1) *= visibility;
        state->state = BiphotonState(rho);
    });
}

spdc_status spdc_state_apply_depolarization(spdc_state* state, double visibility) {
    if (spdc_status s = require(state != nullptr, "state handle is null")) return s;
    return guarded([&] {
        if (!(visibility >= 0.0 && visibility <= 1.0)) {
            throw std::invalid_argument("visibility must lie in [0,1]");
        }
        Mat4c rho = visibility * state->state.rho() + (1.0 - visibility) * 0.25 * Mat4c::Identity();
        state->state = BiphotonState(rho);
    });
}

void spdc_state_destroy(spdc_state* state) {
    delete state;
}

spdc_status spdc_state_coincidence_probability(const spdc_state* state, double theta1_rad,
                                               double theta2_rad, double* out) {
    if (spdc_status s = require(state && out, "null handle or out pointer")) return s;
    return guarded([&] {
        *out = coincidence_probability(state->state, AnalyzerSetting(theta1_rad, theta2_rad));
    });
}

spdc_status spdc_state_singles_probability(const spdc_state* state, int arm, double theta_rad,
                                           double* out) {
    if (spdc_status s = require(state && out, "null handle or out pointer")) return s;
    if (spdc_status s = require(arm == 1 || arm == 2, "arm must be 1 or 2")) return s;
    return guarded([&] {
        *out = (arm == 1) ? singles_probability_arm1(state->state, theta_rad)
                          : singles_probability_arm2(state->state, theta_rad);
    });
}

spdc_status spdc_state_fringe_visibility(const spdc_state* state, double theta1_rad, double* out) {
    if (spdc_status s = require(state && out, "null handle or out pointer")) return s;
    return guarded([&] { *out = fringe_visibility(state->state, theta1_rad); });
}

spdc_status spdc_state_correlation(const spdc_state* state, double a_rad, double b_rad,
                                   double* out) {
    if (spdc_status s = require(state && out, "null handle or out pointer")) return s;
    return guarded([&] { *out = correlation_E(state->state, a_rad, b_rad); });
}

spdc_status spdc_state_chsh(const spdc_state* state, double a_rad, double a_alt_rad, double b_rad,
                            double b_alt_rad, double* out) {
    if (spdc_status s = require(state && out, "null handle or out pointer")) return s;
    return guarded([&] { *out = chsh_S(state->state, a_rad, a_alt_rad, b_rad, b_alt_rad); });
}

/* ---------------------------- crystal ------------------------------ */

spdc_status spdc_crystal_create(const char* sellmeier_json_path, double length_mm,
                                double grating_period_um, double pump_wavelength_nm,
                                double temperature_offset_c, spdc_crystal** out) {
    if (spdc_status s = require(out && sellmeier_json_path, "null path or out pointer")) return s;
    return guarded([&] {
        CrystalSpec spec;
        spec.length_mm = length_mm;
        spec.grating_period_um = grating_period_um;
        spec.pump_wavelength_nm = pump_wavelength_nm;
        spec.temperature_offset_c = temperature_offset_c;
        spec.validate();
        *out = new spdc_crystal{spec, SellmeierSet::load(sellmeier_json_path)};
    });
}

void spdc_crystal_destroy(spdc_crystal* crystal) {
    delete crystal;
}

spdc_status spdc_crystal_refractive_index(const spdc_crystal* crystal, char axis, double lambda_nm,
                                          double t_c, double* out) {
    if (spdc_status s = require(crystal && out, "null handle or out pointer")) return s;
    const char a = static_cast<char>(std::tolower(static_cast<unsigned char>(axis)));
    if (spdc_status s = require(a == 'y' || a == 'z', "axis must be 'y' or 'z'")) return s;
    return guarded([&] {
        *out = refractive_index(crystal->sellmeier, a == 'y' ? CrystalAxis::Y : CrystalAxis::Z,
                                lambda_nm, t_c);
    });
}

spdc_status spdc_crystal_qpm_mismatch(const spdc_crystal* crystal, double lambda_s_nm, double t_c,
                                      double* out_rad_per_m) {
    if (spdc_status s = require(crystal && out_rad_per_m, "null handle or out pointer")) return s;
    return guarded([&] {
        *out_rad_per_m = qpm_mismatch(crystal->spec, crystal->sellmeier, lambda_s_nm, t_c);
    });
}

spdc_status spdc_crystal_degenerate_temperature(const spdc_crystal* crystal, double* out_c) {
    if (spdc_status s = require(crystal && out_c, "null handle or out pointer")) return s;
    return guarded([&] {
        *out_c = solve_degenerate_temperature(crystal->spec, crystal->sellmeier);
    });
}

spdc_status spdc_conjugate_wavelength(double lambda_p_nm, double lambda_s_nm, double* out_nm) {
    if (spdc_status s = require(out_nm != nullptr, "out pointer is null")) return s;
    return guarded([&] { *out_nm = conjugate_wavelength(lambda_p_nm, lambda_s_nm); });
}

/* --------------------------- experiments --------------------------- */

spdc_status spdc_experiment_create(const char* config_json_path, spdc_experiment** out) {
    if (spdc_status s = require(out && config_json_path, "null path or out pointer")) return s;
    return guarded([&] {
        *out = new spdc_experiment{ExperimentEngine(load_config(config_json_path))};
    });
}

void spdc_experiment_destroy(spdc_experiment* exp) {
    delete exp;
}

spdc_status spdc_experiment_set_seed(spdc_experiment* exp, uint64_t seed) {
    if (spdc_status s = require(exp != nullptr, "experiment handle is null")) return s;
    exp->engine.set_seed(seed);
    return SPDC_OK;
}

spdc_status spdc_experiment_set_analytic_only(spdc_experiment* exp, int enabled) {
    if (spdc_status s = require(exp != nullptr, "experiment handle is null")) return s;
    exp->engine.set_analytic_only(enabled != 0);
    return SPDC_OK;
}

namespace {

std::string resolve_out_dir(const spdc_experiment* exp, const char* out_dir) {
    return out_dir ? std::string(out_dir) : exp->engine.config().output_dir;
}

} // namespace

spdc_status spdc_experiment_run_fringe_scan(spdc_experiment* exp, const char* out_dir) {
    if (spdc_status s = require(exp != nullptr, "experiment handle is null")) return s;
    return guarded([&] { exp->engine.run_fringe_scan(resolve_out_dir(exp, out_dir)); });
}

spdc_status spdc_experiment_run_iris_sweep(spdc_experiment* exp, const char* out_dir) {
    if (spdc_status s = require(exp != nullptr, "experiment handle is null")) return s;
    return guarded([&] { exp->engine.run_iris_sweep(resolve_out_dir(exp, out_dir)); });
}

spdc_status spdc_experiment_run_tuning_sweep(spdc_experiment* exp, const char* out_dir) {
    if (spdc_status s = require(exp != nullptr, "experiment handle is null")) return s;
    return guarded([&] { exp->engine.run_tuning_sweep(resolve_out_dir(exp, out_dir)); });
}

spdc_status spdc_experiment_run_bell_test(spdc_experiment* exp, const char* out_dir) {
    if (spdc_status s = require(exp != nullptr, "experiment handle is null")) return s;
    return guarded([&] { exp->engine.run_bell_test(resolve_out_dir(exp, out_dir)); });
}

spdc_status spdc_experiment_run_lock_sim(spdc_experiment* exp, const char* out_dir) {
    if (spdc_status s = require(exp != nullptr, "experiment handle is null")) return s;
    return guarded([&] { exp->engine.run_lock_sim(resolve_out_dir(exp, out_dir)); });
}

const char* spdc_experiment_summary_json(const spdc_experiment* exp) {
    if (!exp || exp->engine.last_summary_json().empty()) return nullptr;
    return exp->engine.last_summary_json().c_str();
}

} /* extern "C" */
