#ifndef HCT_H
#define HCT_H

/* C interface to the hct library. Every function returns an hct_status;
   on failure hct_last_error() describes the problem for the calling thread.
   Strings returned through char** are owned by the caller and released
   with hct_string_free(). */

#include <stddef.h>

#if defined(_WIN32)
#define HCT_API __declspec(dllexport)
#else
#define HCT_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef int hct_status; /* 0 on success, otherwise an error code */

#define HCT_OK 0

typedef struct hct_mesh hct_mesh;
typedef struct hct_complex hct_complex;

HCT_API const char* hct_version(void);
HCT_API const char* hct_last_error(void);
HCT_API const char* hct_status_name(hct_status code);

/* Meshes */
HCT_API hct_status hct_mesh_generate(const char* name, int n, hct_mesh** out);
HCT_API hct_status hct_mesh_from_json(const char* text, hct_mesh** out);
HCT_API hct_status hct_mesh_to_json(const hct_mesh* mesh, char** out);
/* counts must hold 4 entries; unused degrees are set to 0. */
HCT_API hct_status hct_mesh_counts(const hct_mesh* mesh, int* dim, size_t counts[4]);
HCT_API void hct_mesh_free(hct_mesh* mesh);

/* Discrete complexes. partition: none | all | halfspace:... | faces:[...] | labels:[...];
   scheme: whitney | dec. Weights are the identity. */
HCT_API hct_status hct_complex_assemble(const hct_mesh* mesh, const char* partition, const char* scheme,
                                        hct_complex** out);
HCT_API hct_status hct_complex_dim(const hct_complex* c, int* dim);
HCT_API hct_status hct_complex_dofs(const hct_complex* c, int q, size_t* dofs);
HCT_API hct_status hct_complex_harmonic_dim(const hct_complex* c, int q, size_t* dim);
HCT_API hct_status hct_complex_poincare_constant(const hct_complex* c, int q, double* constant);
/* JSON of the coboundary (kind "d") or mass matrix (kind "mass") in coo format. */
HCT_API hct_status hct_complex_matrix_json(const hct_complex* c, const char* kind, int q, char** out);
HCT_API void hct_complex_free(hct_complex* c);

/* Batch runs. output_override may be NULL; report_json and all_passed may be NULL. */
HCT_API hct_status hct_run(const char* config_path, const char* output_override, char** report_json,
                           int* all_passed);
/* format: json | csv */
HCT_API hct_status hct_report_convert(const char* report_json, const char* format, char** out);

HCT_API hct_status hct_read_file(const char* path, char** out);
HCT_API hct_status hct_write_file_atomic(const char* path, const char* content);
HCT_API void hct_string_free(char* s);

#ifdef __cplusplus
}
#endif

#endif
