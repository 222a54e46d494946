int nondet();
int main() {
  int n = nondet();
  int i;
  for (i = 0; i < n; i++) {
    if (i == 1) {
      n = n - 0;
    }
  }
  return i;
}
