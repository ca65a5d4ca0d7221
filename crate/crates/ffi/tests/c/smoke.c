#include <math.h>
#include <stdio.h>

#include "anderson_band.h"

int main(void) {
    AbParams p = {5.0, 5.0, 0.0, 0.0, 0.5, 0.5};
    AbSpectrum *s = NULL;
    if (ab_spectrum(&p, &s) != AB_STATUS_OK) return 1;
    double lo, hi;
    if (ab_spectrum_band_count(s) != 2) return 2;
    if (ab_spectrum_band(s, 1, &lo, &hi) != AB_STATUS_OK) return 3;
    if (fabs(lo - 3.0) > 1e-9 || fabs(hi - 7.0) > 1e-9) return 4;
    if (ab_spectrum_gap(s, 0, &lo, &hi) != AB_STATUS_OK || !isinf(lo)) return 5;
    if (ab_spectrum_band(s, 9, &lo, &hi) != AB_STATUS_OUT_OF_RANGE) return 6;
    if (ab_last_error_message() == NULL) return 7;
    ab_spectrum_free(s);

    double lambdas[2] = {1.0, 1.4}, offsets[2] = {0.0, 2.0};
    AbCertReport *r = NULL;
    if (ab_certify(lambdas, offsets, 2, 1.5, 12, &r) != AB_STATUS_OK) return 8;
    if (ab_cert_report_verdict(r) != AB_VERDICT_CERTIFIED_UH) return 9;
    if (!(ab_cert_report_margin(r) > 1e-6)) return 10;
    ab_cert_report_free(r);

    printf("ok %s\n", ab_version());
    return 0;
}
