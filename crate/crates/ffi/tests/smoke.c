#include <math.h>
#include <stdio.h>
#include <string.h>

#include "qpcocycle.h"

int main(void) {
    const char *doc = "{\"alpha\": 0.6180339887498949, \"map\": {\"kind\": \"const\","
                      " \"m\": {\"a\": 0.0, \"b\": -1.0, \"c\": 1.0, \"d\": 0.0}}}";
    QpCocycle *c = NULL;
    if (qp_cocycle_from_json(doc, &c) != QP_STATUS_OK) return 1;
    double rho = 0.0;
    if (qp_rotation_number(c, 100000, &rho) != QP_STATUS_OK) return 2;
    qp_cocycle_free(c);
    if (fabs(rho - 0.25) > 1e-4) return 3;

    QpCf *cf = NULL;
    if (qp_cf_expand(0.6180339887498949, 10, &cf) != QP_STATUS_OK) return 4;
    QpCfRow row;
    if (qp_cf_row(cf, 10, &row) != QP_STATUS_OK || row.q != 89) return 5;
    qp_cf_free(cf);

    if (qp_cocycle_from_json("[]", &c) != QP_STATUS_CONFIG_INVALID) return 6;
    if (strncmp(qp_last_error_message(), "CONFIG_INVALID", 14) != 0) return 7;
    printf("ok %s\n", qp_version());
    return 0;
}
