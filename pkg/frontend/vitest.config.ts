// Plain object (no vitest import) so the suite also runs under a globally
// installed vitest, where "vitest/config" is not resolvable from this
// directory.
export default {
  test: {
    environment: "node",
    include: ["test/**/*.test.ts"],
    testTimeout: 30_000,
    hookTimeout: 120_000,
  },
};
