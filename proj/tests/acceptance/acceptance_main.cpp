#include <iostream>

#include "twolayer/acceptance.hpp"
#include "twolayer/error.hpp"

int main(int argc, char** argv) {
    using namespace twolayer;
    try {
        const RunSpec spec = argc > 1 ? load_config(argv[1]) : default_run_spec();
        bool all = true;
        for (const CheckResult& c : acceptance::all(spec)) {
            std::cout << (c.passed ? "PASS" : "FAIL") << "  [" << c.id << "] " << c.name << ": " << c.detail
                      << " (" << c.seconds << " s)\n";
            all = all && c.passed;
        }
        std::cout << (all ? "all acceptance criteria passed" : "acceptance FAILED") << "\n";
        return all ? 0 : 1;
    } catch (const std::exception& e) {
        std::cerr << error_record(e).dump() << "\n";
        return exit_code_for(e);
    }
}
