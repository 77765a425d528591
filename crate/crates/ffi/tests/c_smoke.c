#include <math.h>
#include <stdio.h>
#include <string.h>

#include "pointderiv.h"

#define CHECK(cond)                                                   \
  do {                                                                \
    if (!(cond)) {                                                    \
      fprintf(stderr, "check failed at line %d: %s\n", __LINE__, #cond); \
      return 1;                                                       \
    }                                                                 \
  } while (0)

int main(void) {
  PdDomain *d = NULL;
  CHECK(pd_domain_roadrunner(0.75, 0.5, 1.0, 0.25, 0.0, 8, &d) == PD_STATUS_OK);
  CHECK(pd_domain_hole_count(d) == 6);

  PdCriterionSummary s;
  CHECK(pd_criterion(d, 0.5, 20, &s) == PD_STATUS_OK);
  CHECK(s.verdict == PD_VERDICT_BPD_SUFFICIENT);
  CHECK(fabs(s.total_upper - pow(2.0, 1.5) / 4.0) < 1e-9);

  PdComplex coeffs[3] = {{0, 0}, {0, 0}, {1, 0}};
  PdFunction *f = NULL;
  CHECK(pd_function_polynomial(coeffs, 3, &f) == PD_STATUS_OK);
  PdLimitSummary l;
  CHECK(pd_nontangential_limit(f, d, 3.141592653589793, 0.5, 16, 1e-3, &l) == PD_STATUS_OK);
  CHECK(l.verdict == PD_LIMIT_VERDICT_CONVERGED);

  PdComplex x = {-0.3, 0.0}, q;
  double err = -1.0;
  CHECK(pd_quotient_via_cauchy(f, d, x, 3.141592653589793, 0.5, 0.5, 10, 1, 1e-10, &q, &err) == PD_STATUS_OK);
  CHECK(fabs(q.re + 0.3) < 1e-9 && fabs(q.im) < 1e-9 && err >= 0.0);

  PdDomain *bad = NULL;
  CHECK(pd_domain_roadrunner(0.75, 0.5, 1.0, 1.5, 0.0, 8, &bad) == PD_STATUS_INVALID_ARGUMENT);
  CHECK(bad == NULL);
  char msg[256];
  CHECK(pd_last_error_message(msg, sizeof msg) > 0 && strstr(msg, "radius ratio") != NULL);

  pd_function_free(f);
  pd_domain_free(d);
  puts("ok");
  return 0;
}
