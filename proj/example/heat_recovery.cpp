// Samples the 1-D heat equation solution and searches for a closed form.
//
//   example_heat_recovery [out_dir] [seed]

#include <cstdlib>
#include <iostream>
#include <string>

#include "symdistill/symdistill.hpp"

using namespace symdistill;

int main(int argc, char** argv)
{
    const std::string out = argc > 1 ? argv[1] : "heat_run";
    const std::uint64_t seed = argc > 2 ? std::strtoull(argv[2], nullptr, 10) : 1;

    Rng rng(seed);
    const auto table = gen_heat(1000, 0.2, rng);

    SRConfig config;
    config.ops = OperatorSet::from_names({"+", "*", "inv", "sin", "exp"});
    config.ops.at(OpCode::Exp).arg_complexity_limit = 3;
    config.ops.at(OpCode::Sin).arg_complexity_limit = 3;
    config.parsimony = 0.01;
    config.n_iterations = 400;
    config.seed = seed;

    const auto result = distill(table, config, out);
    const auto& front = result.fit.fronts[0];
    for (std::size_t i = 0; i < front.size(); ++i) {
        const char* mark = i == result.fit.best_index[0] ? "*" : " ";
        std::cout << mark << " " << front[i].complexity << "  " << front[i].loss << "  "
                  << render(front[i].expr, table.input_names) << "\n";
    }
    std::cout << "exact: exp(" << -0.2 * 3.141592653589793 * 3.141592653589793 << " * t) * sin(3.14159 * x)\n";
    return 0;
}
