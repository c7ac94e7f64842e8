#include <math.h>
#include <stdio.h>
#include "hyperlattice.h"

#define CHECK(cond) do { if (!(cond)) { fprintf(stderr, "failed: %s (line %d)\n", #cond, __LINE__); return 1; } } while (0)

int main(void) {
    HlBall *ball = NULL;
    CHECK(hl_ball_new(1, 0.0, 1.0, 10.0, &ball) == HL_STATUS_OK);
    uint64_t n = 0;
    CHECK(hl_ball_count(ball, 1, &n) == HL_STATUS_OK);
    CHECK(n == 52);

    HlAngles *angles = NULL;
    CHECK(hl_ball_angles(ball, 0.0, 2.0, 1, &angles) == HL_STATUS_OK);
    CHECK(hl_angles_len(angles) == 52);
    HlAngleSample s;
    CHECK(hl_angles_get(angles, 0, &s) == HL_STATUS_OK);
    CHECK(s.gamma.a * s.gamma.d - s.gamma.b * s.gamma.c == 1);
    hl_angles_free(angles);
    hl_ball_free(ball);

    double xi = 0.0;
    CHECK(hl_xi(0.0, 1.0, 0.0, &xi) == HL_STATUS_OK);
    CHECK(fabs(xi - 0.5) < 1e-12);
    CHECK(hl_ball_new(0, 0.0, 1.0, 2.0, &ball) == HL_STATUS_INVALID_ARGUMENT);
    CHECK(hl_last_error() != NULL);
    printf("ok\n");
    return 0;
}
