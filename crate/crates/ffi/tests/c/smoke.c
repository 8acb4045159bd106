#include <math.h>
#include <stdio.h>
#include <string.h>
#include "sov_xxx.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s (line %d)\n", #cond, __LINE__); return 1; } } while (0)

int main(void) {
    SovComplex xi[1] = {{0.0, 0.0}};
    SovComplex eta = {1.0, 0.0};
    SovParams *p = NULL;
    CHECK(sov_params_new(eta, xi, 1, 1.0, &p) == SOV_STATUS_OK);
    SovSpectrum *s = NULL;
    CHECK(sov_spectrum_new(p, 1, &s) == SOV_STATUS_OK);
    size_t len = 0, minus = 0, plus = 0, deg = 0;
    CHECK(sov_spectrum_len(s, &len) == SOV_STATUS_OK && len == 2);
    for (size_t i = 0; i < len; i++) {
        CHECK(sov_spectrum_degree(s, i, &deg) == SOV_STATUS_OK);
        if (deg == 0) minus = i; else plus = i;
    }
    SovComplex v;
    CHECK(sov_form_factor(s, minus, plus, 1, SOV_OPERATOR_SIGMA_MINUS, &v) == SOV_STATUS_OK);
    CHECK(fabs(v.re + 0.5) < 1e-10 && fabs(v.im) < 1e-10);
    CHECK(sov_gaudin_norm(s, plus, &v) == SOV_STATUS_OK && fabs(v.re - 0.5) < 1e-10);
    CHECK(sov_form_factor(s, 7, plus, 1, SOV_OPERATOR_SIGMA_Z, &v) == SOV_STATUS_OUT_OF_RANGE);
    char msg[128];
    CHECK(sov_last_error(msg, sizeof msg) > 0 && strstr(msg, "out of range") != NULL);
    sov_spectrum_free(s);
    sov_params_free(p);
    CHECK(sov_params_sample(0, 1, 0.3, &p) == SOV_STATUS_INVALID_ARGUMENT && p == NULL);
    printf("ok\n");
    return 0;
}
