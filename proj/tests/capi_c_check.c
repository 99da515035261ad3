#include <stdio.h>

#include "nlsgd/nlsgd.h"

int main(void) {
  nlsgd_nonlin* map = NULL;
  double x[3] = {1.5, -0.2, 0.0};
  double y[3];
  if (nlsgd_nonlin_create("sign", 3, 0.0, &map) != NLSGD_OK) return 1;
  if (nlsgd_nonlin_apply(map, x, 3, y) != NLSGD_OK) return 1;
  nlsgd_nonlin_free(map);
  if (y[0] != 1.0 || y[1] != -1.0 || y[2] != 0.0) return 1;
  printf("nlsgd %s\n", nlsgd_version());
  return 0;
}
