#ifndef SPDCSIM_H
#define SPDCSIM_H

/*
 * C API of the spdcsim shared library: simulation of a dual-pumped
 * collinear type-II downconversion source of polarization-entangled
 * photon pairs.
 *
 * All functions return a spdc_status; results are written through out
 * parameters. On any failure spdc_last_error() returns a human-readable
 * message for the calling thread. Handles are opaque and must be released
 * with their matching _destroy function.
 *
 * Distinct handles may be used from distinct threads concurrently; a
 * single handle is not synchronized. Error messages are thread-local.
 *
 * Angle arguments are radians unless the name says otherwise; the
 * experiment layer's configuration files and CSV outputs use degrees.
 */

#include <stdint.h>

#if defined(_WIN32)
#define SPDC_API __declspec(dllexport)
#else
#define SPDC_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum spdc_status {
    SPDC_OK = 0,
    SPDC_ERR_INVALID_ARGUMENT = 1,
    SPDC_ERR_RANGE = 2,
    SPDC_ERR_CONFIG = 3,
    SPDC_ERR_NO_PHASE_MATCH = 4,
    SPDC_ERR_NOT_CONVERGED = 5,
    SPDC_ERR_UNDEFINED_RESULT = 6,
    SPDC_ERR_LOCK_FAILURE = 7,
    SPDC_ERR_IO = 8,
    SPDC_ERR_INTERNAL = 9
} spdc_status;

SPDC_API const char* spdc_status_name(spdc_status status);

/* Message describing the most recent failure on this thread. */
SPDC_API const char* spdc_last_error(void);

SPDC_API void spdc_version(int* major, int* minor, int* patch);

/* ------------------------------------------------------------------ */
/* Two-photon polarization states                                      */
/* ------------------------------------------------------------------ */

typedef struct spdc_state spdc_state;

/* (0, 1, e^{i phi}, 0)/sqrt(2) over (H1H2, H1V2, V1H2, V1V2);
 * phi = 0 is the triplet, phi = pi the singlet. */
SPDC_API spdc_status spdc_state_create_phase(double phi_rad, spdc_state** out);

/* HV/VH dephasing: keeps H/V populations, scales their coherence by v. */
SPDC_API spdc_status spdc_state_apply_dephasing(spdc_state* state, double visibility);

/* Isotropic admixture: rho -> v rho_pure + (1 - v) I/4. */
SPDC_API spdc_status spdc_state_apply_depolarization(spdc_state* state, double visibility);

SPDC_API void spdc_state_destroy(spdc_state* state);

SPDC_API spdc_status spdc_state_coincidence_probability(const spdc_state* state,
                                                        double theta1_rad, double theta2_rad,
                                                        double* out);

/* arm is 1 or 2. */
SPDC_API spdc_status spdc_state_singles_probability(const spdc_state* state, int arm,
                                                    double theta_rad, double* out);

SPDC_API spdc_status spdc_state_fringe_visibility(const spdc_state* state, double theta1_rad,
                                                  double* out);

SPDC_API spdc_status spdc_state_correlation(const spdc_state* state, double a_rad, double b_rad,
                                            double* out);

SPDC_API spdc_status spdc_state_chsh(const spdc_state* state, double a_rad, double a_alt_rad,
                                     double b_rad, double b_alt_rad, double* out);

/* ------------------------------------------------------------------ */
/* Crystal phase matching                                              */
/* ------------------------------------------------------------------ */

typedef struct spdc_crystal spdc_crystal;

/* Loads a dispersion coefficient file and binds it to a crystal geometry. */
SPDC_API spdc_status spdc_crystal_create(const char* sellmeier_json_path, double length_mm,
                                         double grating_period_um, double pump_wavelength_nm,
                                         double temperature_offset_c, spdc_crystal** out);

SPDC_API void spdc_crystal_destroy(spdc_crystal* crystal);

/* axis is 'y' or 'z' (case insensitive). */
SPDC_API spdc_status spdc_crystal_refractive_index(const spdc_crystal* crystal, char axis,
                                                   double lambda_nm, double t_c, double* out);

SPDC_API spdc_status spdc_crystal_qpm_mismatch(const spdc_crystal* crystal, double lambda_s_nm,
                                               double t_c, double* out_rad_per_m);

SPDC_API spdc_status spdc_crystal_degenerate_temperature(const spdc_crystal* crystal,
                                                         double* out_c);

SPDC_API spdc_status spdc_conjugate_wavelength(double lambda_p_nm, double lambda_s_nm,
                                               double* out_nm);

/* ------------------------------------------------------------------ */
/* Experiments                                                         */
/* ------------------------------------------------------------------ */

typedef struct spdc_experiment spdc_experiment;

/* Loads and validates a JSON experiment configuration (including the
 * referenced dispersion file). */
SPDC_API spdc_status spdc_experiment_create(const char* config_json_path, spdc_experiment** out);

SPDC_API void spdc_experiment_destroy(spdc_experiment* exp);

SPDC_API spdc_status spdc_experiment_set_seed(spdc_experiment* exp, uint64_t seed);

SPDC_API spdc_status spdc_experiment_set_analytic_only(spdc_experiment* exp, int enabled);

/* Each run writes its CSV/JSON dataset into out_dir (NULL = the config's
 * output_dir) and stores a JSON summary retrievable below. Outputs are
 * byte-identical for identical (config, seed). */
SPDC_API spdc_status spdc_experiment_run_fringe_scan(spdc_experiment* exp, const char* out_dir);
SPDC_API spdc_status spdc_experiment_run_iris_sweep(spdc_experiment* exp, const char* out_dir);
SPDC_API spdc_status spdc_experiment_run_tuning_sweep(spdc_experiment* exp, const char* out_dir);
SPDC_API spdc_status spdc_experiment_run_bell_test(spdc_experiment* exp, const char* out_dir);
/* Returns SPDC_ERR_LOCK_FAILURE (after writing outputs) if the servo lost
 * the fringe. */
SPDC_API spdc_status spdc_experiment_run_lock_sim(spdc_experiment* exp, const char* out_dir);

/* JSON summary of the most recent run; owned by the handle, valid until
 * the next run or destroy. NULL if no run has completed. */
SPDC_API const char* spdc_experiment_summary_json(const spdc_experiment* exp);

#ifdef __cplusplus
} /* extern "C" */
#endif

#endif /* SPDCSIM_H */
