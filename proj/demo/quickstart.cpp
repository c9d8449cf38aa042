// Draws one sample from the simulation design, runs Forward I with White
// standard errors and the Lasso baseline, and prints what each picked.

#include <iostream>

#include "fsel/fsel.hpp"

int main() {
    fsel::DgpConfig dgp;
    dgp.n = 200;
    dgp.c_p = 2.0;
    dgp.b = 0.75;
    dgp.rho = 0.5;
    dgp.seed = 20240601;
    const fsel::SimSample s = fsel::gen_sample(dgp, 0);

    fsel::SelectionConfig config;  // Forward I, White, alpha = .05, c_tau = 1.1
    const fsel::SelectionTrace trace = fsel::forward_select(s.X, s.y, config);
    const fsel::SelectedModel model = fsel::refit(s.X, s.y, trace);

    std::cout << "forward selection (" << fsel::to_string(trace.reason) << "):";
    for (fsel::Index j : trace.support) std::cout << ' ' << j + 1;
    std::cout << "\n  prediction error norm " << fsel::mpen(s, model) << '\n';

    const fsel::BcchFit lasso = fsel::bcch_fit(s.X, s.y);
    std::cout << "lasso support size " << lasso.lasso.support.size()
              << ", post-lasso prediction error norm " << fsel::mpen(s, lasso.post) << '\n';
    std::cout << "oracle prediction error norm " << fsel::mpen(s, fsel::oracle_fit(s)) << '\n';
}
