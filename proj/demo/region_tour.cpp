// Prints the analytic regions of the two reference channels next to a short
// simulation at half the primary stability limit.
#include <cstdio>

#include "cogsim/cogsim.hpp"

using namespace cogsim;

static void tour(const char* name, const ErasureSpec& spec, std::initializer_list<Algorithm> algs)
{
    std::printf("%s\n", name);
    for (Algorithm alg : algs) {
        const ThroughputRegion region = region_for(alg, spec);
        const double lambda = 0.5 * region.r1_limit();
        const BoundaryPoint p = region.r2_max(lambda);

        RunConfig c;
        c.alg = alg;
        c.channel = spec;
        c.arrivals = ArrivalProcess::bernoulli(lambda);
        c.q = p.q;
        c.horizon = 200'000;
        const RunMetrics m = run(c).metrics;
        std::printf("  alg %d  r1 limit %.5f  at r1=%.4f: analytic r2 %.4f (q=%.2f), simulated r2 %.4f\n",
                    to_int(alg), region.r1_limit(), lambda, p.r2, p.q, m.r2);
    }
}

int main()
{
    tour("relay reference channel", relay_reference_channel(),
         {Algorithm::no_cooperation, Algorithm::simple_forwarding});
    tour("coding reference channel", coding_reference_channel(),
         {Algorithm::network_coding, Algorithm::randomized_relay});
}
