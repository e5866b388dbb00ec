/*
 Copyright 2026 the tempref authors
 Licensed under the Apache License, Version 2.0 (the "License");
 you may not use this file except in compliance with the License.
 You may obtain a copy of the License at

      http://www.apache.org/licenses/LICENSE-2.0

 Unless required by applicable law or agreed to in writing, software
 distributed under the License is distributed on an "AS IS" BASIS,
 WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 See the License for the specific language governing permissions and
 limitations under the License.
*/

/* C interface of the tempref shared library. All functions return TS_OK on
 * success; on failure, ts_last_error() describes the problem (thread-local). */

#ifndef TEMPREF_CAPI_H
#define TEMPREF_CAPI_H

#include <stddef.h>
#include <stdint.h>

#ifdef __cplusplus
extern "C" {
#endif

#define TS_OK 0
#define TS_ERR_RUNTIME 1 /* IO failures, training errors, bad files */
#define TS_ERR_USAGE 2   /* invalid arguments or config */

typedef struct ts_dataset ts_dataset;
typedef struct ts_model ts_model;

const char* ts_last_error(void);
void ts_string_free(char* s);

/* kind: basic | non_markovian | non_monotonic | non_independent */
int ts_dataset_generate(const char* kind, int n_samples, uint64_t seed,
                        ts_dataset** out);
int ts_dataset_load(const char* path, ts_dataset** out);
int ts_dataset_save(const ts_dataset* dataset, const char* path);
int ts_dataset_info(const ts_dataset* dataset, int* n, int* m, int* horizon,
                    int* class_count);
/* Fraction of samples labeled with the highest class (two-class balance). */
int ts_dataset_positive_fraction(const ts_dataset* dataset, double* out);
/* Borrowed pointer, valid while the dataset lives. */
int ts_dataset_id(const ts_dataset* dataset, size_t index, const char** out);
void ts_dataset_free(ts_dataset* dataset);

int ts_model_load(const char* path, ts_model** out);
int ts_model_save(const ts_model* model, const char* path);
/* out_classes must hold one int per dataset row (1-based class indices). */
int ts_model_predict(const ts_model* model, const ts_dataset* dataset,
                     int* out_classes);
/* Writes marginals.csv (and discounts.csv for mRNN) under out_dir. */
int ts_model_export(const ts_model* model, const ts_dataset* dataset,
                    const char* out_dir);
void ts_model_free(ts_model* model);

/* Both take the run-config JSON document (see README for the schema; unknown
 * keys are rejected). Outputs are written under output.dir; the returned
 * string (caller frees with ts_string_free) is the JSON report. */
int ts_config_train(const char* config_json, char** report_out);
int ts_config_evaluate(const char* config_json, char** report_out);

#ifdef __cplusplus
}
#endif

#endif /* TEMPREF_CAPI_H */
