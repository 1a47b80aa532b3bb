#include <math.h>
#include <stdio.h>
#include "fracpert.h"

#define CHECK(cond)                                                  \
    do {                                                             \
        if (!(cond)) {                                               \
            fprintf(stderr, "line %d: %s\n", __LINE__, #cond);       \
            return 1;                                                \
        }                                                            \
    } while (0)

int main(void) {
    double g = 0.0;
    CHECK(fracpert_gamma(1.5, &g) == FRACPERT_STATUS_OK);
    CHECK(fabs(g - 0.88622692545275801) < 1e-14);

    double minus_one = -1.0;
    FracpertMatrix *a = NULL;
    CHECK(fracpert_matrix_new(1, &minus_one, &a) == FRACPERT_STATUS_OK);
    double zero = 0.0;
    FracpertMatrix *b = NULL;
    CHECK(fracpert_matrix_new(1, &zero, &b) == FRACPERT_STATUS_OK);

    double times[3] = {0.5, 1.0, 2.0};
    FracpertSeries *s = NULL;
    CHECK(fracpert_series_new(2.0, times, 3, a, b, 1e-10, &s) == FRACPERT_STATUS_OK);
    CHECK(fracpert_series_len(s) == 3);
    for (size_t i = 0; i < 3; ++i) {
        FracpertMatrix *c = NULL;
        CHECK(fracpert_series_cosine(s, i, &c) == FRACPERT_STATUS_OK);
        double v = 0.0;
        CHECK(fracpert_matrix_read(c, &v, 1) == FRACPERT_STATUS_OK);
        CHECK(fabs(v - cos(times[i])) < 1e-10);
        fracpert_matrix_free(c);
    }

    FracpertMatrix *bad = NULL;
    CHECK(fracpert_family(FRACPERT_FAMILY_COSINE, 3.0, 1.0, a, &bad) == FRACPERT_STATUS_DOMAIN);
    char msg[128];
    CHECK(fracpert_last_error(msg, sizeof msg) > 0);

    fracpert_series_free(s);
    fracpert_matrix_free(a);
    fracpert_matrix_free(b);
    puts("ok");
    return 0;
}
