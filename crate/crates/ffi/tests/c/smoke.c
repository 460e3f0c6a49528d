#include <math.h>
#include <stdio.h>
#include "bec_teleport.h"

int main(void) {
    BtState *s = NULL;
    if (bt_channel_generate(2.0, 0.0, 2.0, 0.0, 1.0, 1.0, 24, &s) != BT_STATUS_OK) return 1;
    double e = 0.0;
    if (bt_state_entanglement(s, &e) != BT_STATUS_OK || fabs(e - 1.0) > 1e-5) return 2;
    bt_state_free(s);

    if (bt_channel_generate(2.0, 0.0, 2.0, 0.0, 1.5, 1.0, 24, &s) != BT_STATUS_PRECONDITION) return 3;
    char *msg = bt_last_error_message();
    if (msg == NULL) return 4;
    bt_string_free(msg);

    BtProtocol *p = NULL;
    if (bt_protocol_from_json("{\"trials\": 200, \"seed\": 1}", &p) != BT_STATUS_OK) return 5;
    BtSummary sum;
    if (bt_protocol_run(p, &sum) != BT_STATUS_OK || sum.trials != 200) return 6;
    bt_protocol_free(p);
    printf("%s %.6f\n", bt_version(), sum.success_rate);
    return 0;
}
