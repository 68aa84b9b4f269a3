import java.util.*;

public class Main {
    public static void main(String[] args) {
        Scanner sc = new Scanner(System.in);
        int n = sc.nextInt();
        int[] w = new int[n];
        for (int i = 0; i < n; i++) w[i] = sc.nextInt();
        int best = Integer.MAX_VALUE;
        for (int mask = 0; mask < (1 << n); mask++) {
            int s = 0;
            for (int i = 0; i < n; i++) {
                if ((mask >> i & 1) == 1) s += w[i];
                else s -= w[i];
            }
            best = Math.min(best, Math.abs(s));
        }
        System.out.println(best);
    }
}
