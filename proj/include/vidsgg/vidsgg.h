/* Copyright 2026 The vidsgg Authors. All Rights Reserved.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

/* C interface to the vidsgg library. All handles are opaque; every call
 * returns a vsg_status and, on failure, records a message retrievable with
 * vsg_last_error() on the same thread. Configs and options are passed as
 * JSON text; NULL or "" means defaults. Strings returned through char**
 * must be released with vsg_string_free. */

#ifndef VIDSGG_VIDSGG_H_
#define VIDSGG_VIDSGG_H_

#include <stdint.h>

#if defined(_WIN32)
#define VSG_API __declspec(dllexport)
#else
#define VSG_API __attribute__((visibility("default")))
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum vsg_status {
  VSG_OK = 0,
  VSG_ERR_USAGE = 1,    /* bad argument or configuration */
  VSG_ERR_DATA = 2,     /* unreadable, malformed or inconsistent files */
  VSG_ERR_NUMERIC = 3,  /* non-finite loss or output */
  VSG_ERR_INTERNAL = 4
} vsg_status;

typedef struct vsg_dataset vsg_dataset;
typedef struct vsg_classifier vsg_classifier;
typedef struct vsg_grounding vsg_grounding;
typedef struct vsg_predictions vsg_predictions;
typedef struct vsg_report vsg_report;

/* Called after every epoch; a non-zero return stops training with
 * VSG_ERR_INTERNAL. */
typedef int (*vsg_epoch_fn)(void* user, int epoch, double loss, double lr);

VSG_API const char* vsg_version(void);
VSG_API const char* vsg_last_error(void);
VSG_API void vsg_string_free(char* s);

/* ---- data ---------------------------------------------------------------- */

/* Writes annotations/, features/ and manifest.json under out_dir. */
VSG_API vsg_status vsg_synth(const char* out_dir, const char* synth_json,
                             int train_scenes, int val_scenes);

VSG_API vsg_status vsg_dataset_open(const char* manifest_path,
                                    int with_features, vsg_dataset** out);
VSG_API void vsg_dataset_free(vsg_dataset* ds);
/* split is "train" or "val"; -1 on a bad split. */
VSG_API int vsg_dataset_size(const vsg_dataset* ds, const char* split);
/* Multi-instance statistics of one split at `bins`, as JSON. */
VSG_API vsg_status vsg_dataset_stats(const vsg_dataset* ds, const char* split,
                                     int bins, char** json_out);

/* ---- models -------------------------------------------------------------- */

VSG_API vsg_status vsg_classifier_create(const char* config_json,
                                         vsg_classifier** out);
VSG_API vsg_status vsg_classifier_load(const char* path, vsg_classifier** out);
VSG_API vsg_status vsg_classifier_save(const vsg_classifier* c,
                                       const char* path);
VSG_API vsg_status vsg_classifier_config(const vsg_classifier* c,
                                         char** json_out);
VSG_API void vsg_classifier_free(vsg_classifier* c);

/* Builds the triplet prior from the train split, then trains. */
VSG_API vsg_status vsg_classifier_train(vsg_classifier* c,
                                        const vsg_dataset* ds,
                                        const char* options_json,
                                        vsg_epoch_fn on_epoch, void* user);

VSG_API vsg_status vsg_grounding_create(const char* config_json,
                                        vsg_grounding** out);
VSG_API vsg_status vsg_grounding_load(const char* path, vsg_grounding** out);
VSG_API vsg_status vsg_grounding_save(const vsg_grounding* g, const char* path);
VSG_API vsg_status vsg_grounding_config(const vsg_grounding* g,
                                        char** json_out);
VSG_API void vsg_grounding_free(vsg_grounding* g);

VSG_API vsg_status vsg_grounding_train(vsg_grounding* g, const vsg_dataset* ds,
                                       const char* options_json,
                                       vsg_epoch_fn on_epoch, void* user);

/* ---- inference and evaluation -------------------------------------------- */

/* options: {"mode": "big"|"vidvrd", "k_keep", "score_floor",
 * "nms_threshold", "threads"}. `g` may be NULL in vidvrd mode. */
VSG_API vsg_status vsg_infer(const vsg_classifier* c, const vsg_grounding* g,
                             const vsg_dataset* ds, const char* split,
                             const char* options_json, vsg_predictions** out);
VSG_API vsg_status vsg_predictions_save(const vsg_predictions* p,
                                        const vsg_dataset* ds,
                                        const char* path);
VSG_API vsg_status vsg_predictions_load(const char* path, const vsg_dataset* ds,
                                        vsg_predictions** out);
VSG_API int vsg_predictions_count(const vsg_predictions* p);
VSG_API void vsg_predictions_free(vsg_predictions* p);

VSG_API vsg_status vsg_evaluate(const vsg_dataset* ds, const char* split,
                                const vsg_predictions* p, int threads,
                                vsg_report** out);
/* Keys: "mAP", "R@50", "R@100", "P@1", "P@5", "P@10", "fR_S@50",
 * "fR_S@100", "fR_S@150", "fR_M@50", "fR_M@100", "fR_M@150". */
VSG_API vsg_status vsg_report_metric(const vsg_report* r, const char* key,
                                     double* value);
VSG_API vsg_status vsg_report_json(const vsg_report* r, char** json_out);
VSG_API vsg_status vsg_report_table(const vsg_report* r, char** text_out);
VSG_API vsg_status vsg_report_per_video_csv(const vsg_report* r,
                                            char** csv_out);
VSG_API void vsg_report_free(vsg_report* r);

#ifdef __cplusplus
}
#endif

#endif /* VIDSGG_VIDSGG_H_ */
