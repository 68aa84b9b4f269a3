import java.util.*;

public class Main {
    public static void main(String[] args) {
        Scanner sc = new Scanner(System.in);
        int n = sc.nextInt();
        int[] a = new int[n];
        for (int i = 0; i < n; i++) a[i] = sc.nextInt();
        Arrays.sort(a);
        long sum = 0;
        for (int i = 0; i < n; i++) {
            int j = Arrays.binarySearch(a, a[i] * 2);
            if (j >= 0) sum++;
        }
        System.out.println(sum);
    }
}
