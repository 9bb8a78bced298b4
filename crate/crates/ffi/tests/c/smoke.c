#include <math.h>
#include <stdio.h>
#include <string.h>

#include "lvrep.h"

#define CHECK(call)                                                              \
  do {                                                                           \
    LvrepStatus st_ = (call);                                                    \
    if (st_ != LVREP_STATUS_OK) {                                                \
      fprintf(stderr, "%s failed: %s (%s)\n", #call, lvrep_status_name(st_),    \
              lvrep_last_error_message());                                       \
      return 1;                                                                  \
    }                                                                            \
  } while (0)

int main(void) {
  LvrepMdp *mdp = NULL;
  CHECK(lvrep_mdp_chain(10, 0.1, 0.95, &mdp));
  size_t ns = lvrep_mdp_n_states(mdp);

  double v[10];
  LvrepPolicy *greedy = NULL;
  CHECK(lvrep_value_iteration(mdp, 1e-10, v, ns, &greedy));
  double v_star = 0.0, v_greedy = 0.0;
  CHECK(lvrep_initial_value(mdp, v, ns, &v_star));
  CHECK(lvrep_policy_value(mdp, greedy, &v_greedy));
  if (fabs(v_star - v_greedy) > 1e-6) {
    fprintf(stderr, "greedy value %f differs from optimum %f\n", v_greedy, v_star);
    return 1;
  }

  if (lvrep_mdp_chain(2, 0.1, 0.95, &mdp) != LVREP_STATUS_INVALID_PARAM ||
      lvrep_last_error_message() == NULL) {
    fprintf(stderr, "expected an invalid-parameter error\n");
    return 1;
  }

  char *json = NULL;
  CHECK(lvrep_mdp_to_json(mdp, &json));
  LvrepMdp *copy = NULL;
  CHECK(lvrep_mdp_from_json(json, &copy));
  lvrep_string_free(json);

  printf("v_star %.6f\n", v_star);
  lvrep_policy_free(greedy);
  lvrep_mdp_free(copy);
  lvrep_mdp_free(mdp);
  return 0;
}
