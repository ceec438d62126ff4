// Explains a black-box model around one point with a weighted local fit.
//
// The black box is y = x0^2 + sin(x1). Around x* = (1, 0) a good local
// surrogate is roughly 1 + 2 (x0 - 1) + x1.

#include <cmath>
#include <iostream>
#include <span>
#include <vector>

#include "symdistill/symdistill.hpp"

using namespace symdistill;

int main()
{
    const auto model = [](std::span<const double> z) { return std::vector<double>{z[0] * z[0] + std::sin(z[1])}; };

    Rng rng(7);
    IOTable data;
    data.input_names = {"x0", "x1"};
    data.output_names = {"y"};
    data.x = Matrix(500, 2);
    data.y = Matrix(500, 1);
    for (std::size_t i = 0; i < data.rows(); ++i) {
        data.x(i, 0) = rng.uniform(-3.0, 3.0);
        data.x(i, 1) = rng.uniform(-3.0, 3.0);
        data.y(i, 0) = model(data.x.row(i))[0];
    }

    SlimeParams params;
    params.x_star = {1.0, 0.0};
    params.neighbors = 10;
    params.n_synthetic = 300;
    params.sigma2 = std::vector<double>{0.02, 0.02};
    const auto locale = build_locale(data, params, rng, model);

    SRConfig config;
    config.ops = OperatorSet::from_names({"+", "-", "*", "inv"});
    config.parsimony = 0.001;
    config.n_iterations = 100;
    config.seed = 3;
    const auto fit = slime_fit(locale, config);

    const auto& front = fit.fronts[0];
    for (std::size_t i = 0; i < front.size(); ++i) {
        const char* mark = i == fit.best_index[0] ? "*" : " ";
        std::cout << mark << " " << front[i].complexity << "  " << front[i].loss << "  "
                  << render(front[i].expr, data.input_names) << "\n";
    }
    return 0;
}
