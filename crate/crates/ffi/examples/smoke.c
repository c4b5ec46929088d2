/* Runs a config through the C ABI and prints the stats JSON.
 *
 *   cargo build --release -p disturbsim-ffi
 *   cc -Icrates/ffi/include crates/ffi/examples/smoke.c \
 *      target/release/libdisturbsim_ffi.a -lm -lpthread -ldl -o smoke
 *   ./smoke configs/para.json
 */
#include <stdio.h>

#include "disturbsim.h"

int main(int argc, char **argv) {
    if (argc != 2) {
        fprintf(stderr, "usage: %s config.json\n", argv[0]);
        return 2;
    }
    DsSimulation *sim = NULL;
    if (ds_simulation_from_file(argv[1], &sim) != DS_STATUS_OK) {
        fprintf(stderr, "load: %s\n", ds_last_error());
        return 2;
    }
    DsReport *report = NULL;
    DsStatus st = ds_simulation_run(sim, &report);
    ds_simulation_free(sim);
    if (st != DS_STATUS_OK) {
        fprintf(stderr, "run: %s\n", ds_last_error());
        return 2;
    }
    uint64_t violations = 0;
    ds_report_violations(report, &violations);
    puts(ds_report_json(report));
    ds_report_free(report);
    return violations == 0 ? 0 : 1;
}
