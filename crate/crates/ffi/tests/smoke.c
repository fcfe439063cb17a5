#include <stdio.h>
#include <stdlib.h>
#include <string.h>
#include "apfsim.h"

#define CHECK(call)                                                      \
  do {                                                                   \
    enum ApfStatus st_ = (call);                                         \
    if (st_ != APF_STATUS_OK) {                                          \
      fprintf(stderr, "%s -> %d: %s\n", #call, st_, apf_last_error());   \
      return 1;                                                          \
    }                                                                    \
  } while (0)

int main(void) {
  ApfScenario *sc = NULL;
  if (apf_scenario_from_json("{\"duration\": -1}", &sc) != APF_STATUS_INVALID_CONFIG) return 2;
  if (strstr(apf_last_error(), "duration") == NULL) return 3;

  CHECK(apf_scenario_from_json("{\"duration\": 0.1}", &sc));
  ApfTrace *tr = NULL;
  CHECK(apf_simulate(sc, APF_STRATEGY_EMD_HYBRID, &tr));
  size_t n = apf_trace_len(tr);
  if (n != 5000) return 4;
  double *col = malloc(n * sizeof(double));
  CHECK(apf_trace_column(tr, "is_r", col, n));
  if (apf_trace_column(tr, "is_r", col, n - 1) != APF_STATUS_BUFFER_TOO_SMALL) return 5;
  printf("samples %zu last is_r %f\n", n, col[n - 1]);
  free(col);
  apf_trace_free(tr);
  apf_scenario_free(sc);
  return 0;
}
