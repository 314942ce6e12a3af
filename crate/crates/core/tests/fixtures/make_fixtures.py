"""Regenerates the fixture corpus used by the integration and acceptance tests.

Expected values come from running the Python gold implementations here,
independently of the Rust sandbox. Mutant failing-case sets are computed the
same way and were checked by hand against the comments below.

    python3 make_fixtures.py   # writes corpus.jsonl and mutants.json
"""
import json
import os

HERE = os.path.dirname(os.path.abspath(__file__))

FUNCTIONS = []


def function(fid, entry, py, java, cpp, cases, mutants, tolerant=False):
    FUNCTIONS.append(dict(id=fid, entry=entry, py=py, java=java, cpp=cpp,
                          cases=cases, mutants=mutants, tolerant=tolerant))


# 1. digit sum. Mutant stops before the leading digit: every n >= 1 fails.
function(
    "FIX_sum_digits", "f_gold",
    py="def f_gold(n):\n    total = 0\n    while n > 0:\n        total += n % 10\n        n //= 10\n    return total\n",
    java="static int f_gold(int n) {\n    int total = 0;\n    while (n > 0) {\n        total += n % 10;\n        n /= 10;\n    }\n    return total;\n}\n",
    cpp="int f_gold(int n) {\n    int total = 0;\n    while (n > 0) {\n        total += n % 10;\n        n /= 10;\n    }\n    return total;\n}\n",
    cases=[[0], [5], [10], [99], [123], [1000], [4567], [90909], [7], [31]],
    mutants=dict(
        py="def f_gold(n):\n    total = 0\n    while n > 9:\n        total += n % 10\n        n //= 10\n    return total\n",
        java="static int f_gold(int n) {\n    int total = 0;\n    while (n > 9) {\n        total += n % 10;\n        n /= 10;\n    }\n    return total;\n}\n",
        cpp="int f_gold(int n) {\n    int total = 0;\n    while (n > 9) {\n        total += n % 10;\n        n /= 10;\n    }\n    return total;\n}\n",
    ),
)

# 2. count of even values among the first n. Mutant starts at index 1:
#    fails exactly when arr[0] is even.
function(
    "FIX_count_even", "f_gold",
    py="def f_gold(arr, n):\n    count = 0\n    for i in range(0, n):\n        if arr[i] % 2 == 0:\n            count += 1\n    return count\n",
    java="static int f_gold(int arr[], int n) {\n    int count = 0;\n    for (int i = 0; i < n; i++) {\n        if (arr[i] % 2 == 0) count++;\n    }\n    return count;\n}\n",
    cpp="int f_gold(int arr[], int n) {\n    int count = 0;\n    for (int i = 0; i < n; i++) {\n        if (arr[i] % 2 == 0) count++;\n    }\n    return count;\n}\n",
    cases=[[[1, 2, 3], 3], [[2, 4, 6], 3], [[1], 1], [[0], 1], [[5, 7, 9, 11], 4],
           [[8, 1, 1], 3], [[3, 4], 2], [[10, 20, 30, 40], 2], [[1, 3, 5, 6], 4], [[9, 8], 1]],
    mutants=dict(
        py="def f_gold(arr, n):\n    count = 0\n    for i in range(1, n):\n        if arr[i] % 2 == 0:\n            count += 1\n    return count\n",
        java="static int f_gold(int arr[], int n) {\n    int count = 0;\n    for (int i = 1; i < n; i++) {\n        if (arr[i] % 2 == 0) count++;\n    }\n    return count;\n}\n",
        cpp="int f_gold(int arr[], int n) {\n    int count = 0;\n    for (int i = 1; i < n; i++) {\n        if (arr[i] % 2 == 0) count++;\n    }\n    return count;\n}\n",
    ),
)

# 3. primality. Mutant excludes the square root from trial division:
#    squares of primes (4, 9, 25, 49) are misreported.
function(
    "FIX_is_prime", "f_gold",
    py="def f_gold(n):\n    if n < 2:\n        return False\n    i = 2\n    while i * i <= n:\n        if n % i == 0:\n            return False\n        i += 1\n    return True\n",
    java="static boolean f_gold(int n) {\n    if (n < 2) return false;\n    for (int i = 2; i * i <= n; i++) {\n        if (n % i == 0) return false;\n    }\n    return true;\n}\n",
    cpp="bool f_gold(int n) {\n    if (n < 2) return false;\n    for (int i = 2; i * i <= n; i++) {\n        if (n % i == 0) return false;\n    }\n    return true;\n}\n",
    cases=[[1], [2], [3], [4], [9], [17], [25], [29], [49], [97]],
    mutants=dict(
        py="def f_gold(n):\n    if n < 2:\n        return False\n    i = 2\n    while i * i < n:\n        if n % i == 0:\n            return False\n        i += 1\n    return True\n",
        java="static boolean f_gold(int n) {\n    if (n < 2) return false;\n    for (int i = 2; i * i < n; i++) {\n        if (n % i == 0) return false;\n    }\n    return true;\n}\n",
        cpp="bool f_gold(int n) {\n    if (n < 2) return false;\n    for (int i = 2; i * i < n; i++) {\n        if (n % i == 0) return false;\n    }\n    return true;\n}\n",
    ),
)

# 4. string reversal. Mutant drops index 0: every non-empty string fails.
function(
    "FIX_reverse", "f_gold",
    py="def f_gold(s):\n    out = ''\n    for i in range(len(s) - 1, -1, -1):\n        out += s[i]\n    return out\n",
    java="static String f_gold(String s) {\n    StringBuilder out = new StringBuilder();\n    for (int i = s.length() - 1; i >= 0; i--) {\n        out.append(s.charAt(i));\n    }\n    return out.toString();\n}\n",
    cpp="string f_gold(string s) {\n    string out = \"\";\n    for (int i = (int) s.length() - 1; i >= 0; i--) {\n        out += s[i];\n    }\n    return out;\n}\n",
    cases=[[""], ["a"], ["ab"], ["abc"], ["racecar"], ["hello world"], ["12345"], ["xy z"], ["Geeks"], ["zz"]],
    mutants=dict(
        py="def f_gold(s):\n    out = ''\n    for i in range(len(s) - 1, 0, -1):\n        out += s[i]\n    return out\n",
        java="static String f_gold(String s) {\n    StringBuilder out = new StringBuilder();\n    for (int i = s.length() - 1; i > 0; i--) {\n        out.append(s.charAt(i));\n    }\n    return out.toString();\n}\n",
        cpp="string f_gold(string s) {\n    string out = \"\";\n    for (int i = (int) s.length() - 1; i > 0; i--) {\n        out += s[i];\n    }\n    return out;\n}\n",
    ),
)

# 5. arithmetic mean (float-tolerant). Mutant skips the last element but still
#    divides by n: fails exactly when the last element is non-zero.
function(
    "FIX_mean", "f_gold",
    py="def f_gold(arr, n):\n    total = 0\n    for i in range(n):\n        total += arr[i]\n    return total / n\n",
    java="static double f_gold(int arr[], int n) {\n    double total = 0;\n    for (int i = 0; i < n; i++) total += arr[i];\n    return total / n;\n}\n",
    cpp="double f_gold(int arr[], int n) {\n    double total = 0;\n    for (int i = 0; i < n; i++) total += arr[i];\n    return total / n;\n}\n",
    cases=[[[1, 2, 3], 3], [[4], 1], [[0], 1], [[1, 0], 2], [[10, 20, 30, 40], 4],
           [[1, 1, 1], 3], [[7, 0], 2], [[-3, 3], 2], [[2, 3], 2], [[5, 5, 0], 3]],
    mutants=dict(
        py="def f_gold(arr, n):\n    total = 0\n    for i in range(n - 1):\n        total += arr[i]\n    return total / n\n",
        java="static double f_gold(int arr[], int n) {\n    double total = 0;\n    for (int i = 0; i < n - 1; i++) total += arr[i];\n    return total / n;\n}\n",
        cpp="double f_gold(int arr[], int n) {\n    double total = 0;\n    for (int i = 0; i < n - 1; i++) total += arr[i];\n    return total / n;\n}\n",
    ),
    tolerant=True,
)


def run_python(code, entry, args):
    ns = {}
    exec(code, ns)
    return ns[entry](*args)


def main():
    corpus = []
    mutants = {}
    for f in FUNCTIONS:
        cases = []
        failing = []
        for i, args in enumerate(f["cases"]):
            expected = run_python(f["py"], f["entry"], [json.loads(json.dumps(a)) for a in args])
            got = run_python(f["mutants"]["py"], f["entry"], [json.loads(json.dumps(a)) for a in args])
            cid = "c%d" % i
            cases.append(dict(case_id=cid, args=args, expected=expected))
            same = abs(got - expected) <= 1e-6 if f["tolerant"] else got == expected
            if not same:
                failing.append(cid)
        suite = dict(entry_function=f["entry"], cases=cases)
        suite["equality_mode"] = {"mode": "float_tolerant", "epsilon": 1e-6} if f["tolerant"] else {"mode": "exact"}
        corpus.append(dict(id=f["id"], implementations=dict(python=f["py"], java=f["java"], cpp=f["cpp"]),
                           suite=suite, origin="fixture"))
        mutants[f["id"]] = dict(code=f["mutants"], failing=failing)
    with open(os.path.join(HERE, "corpus.jsonl"), "w") as fh:
        for record in corpus:
            fh.write(json.dumps(record) + "\n")
    with open(os.path.join(HERE, "mutants.json"), "w") as fh:
        json.dump(mutants, fh, indent=2, sort_keys=True)
        fh.write("\n")


if __name__ == "__main__":
    main()
