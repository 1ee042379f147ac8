#include <stdio.h>
#include "parcx.h"

int main(void) {
    ParcxComplex *c = NULL;
    if (parcx_partition_complex(4, false, &c) != PARCX_STATUS_OK) {
        fprintf(stderr, "%s\n", parcx_last_error());
        return 2;
    }
    size_t v = 0, e = 0;
    parcx_complex_count(c, 0, &v);
    parcx_complex_count(c, 1, &e);
    parcx_complex_free(c);

    ParcxReport *r = NULL;
    ParcxStatus s = parcx_verify_main_theorem(3, 3, "fp-sign", &r);
    bool ok = false;
    parcx_report_passed(r, &ok);
    parcx_report_free(r);

    printf("parcx %s: %zu vertices, %zu edges, main statement (3,3,fp-sign) %s\n",
           parcx_version(), v, e, ok ? "passes" : "fails");
    return s == PARCX_STATUS_OK ? 0 : 1;
}
